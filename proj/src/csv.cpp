#include "elute/csv.hpp"

#include "elute/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace elute {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open CSV file: " + path);
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("empty CSV file: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) {
        table.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        row.reserve(table.header.size());
        std::stringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw SchemaError("non-numeric CSV cell '" + cell + "' in " + path);
            }
        }
        if (row.size() != table.header.size()) {
            throw SchemaError("ragged CSV row in " + path);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write CSV file: " + path);
    }
    for (size_t i = 0; i < header.size(); ++i) {
        out << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << format_double(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
    }
}

} // namespace elute
