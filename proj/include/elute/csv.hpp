#pragma once

#include <string>
#include <vector>

namespace elute {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const; // -1 if absent
};

CsvTable read_csv(const std::string& path);

/// Writes values with max round-trip precision (%.17g).
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double v);

} // namespace elute
