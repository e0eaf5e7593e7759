#include "elute/chain_store.hpp"

#include "elute/csv.hpp"
#include "elute/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

using nlohmann::json;

namespace elute {

ChainStore::ChainStore(std::vector<std::string> param_names, double burn_in_fraction)
    : param_names_(std::move(param_names)), burn_in_fraction_(burn_in_fraction) {
    if (param_names_.empty()) {
        throw ConfigError("chain store needs at least one parameter");
    }
    if (!(burn_in_fraction_ >= 0.0) || !(burn_in_fraction_ < 1.0)) {
        throw ConfigError("burn-in fraction must lie in [0, 1)");
    }
}

int ChainStore::add_chain(const std::string& label, std::uint64_t seed) {
    for (const auto& c : chains_) {
        if (c.label == label) {
            throw ConfigError("duplicate chain label: " + label);
        }
    }
    chains_.push_back(Chain{label, seed, {}, {}, {}});
    return static_cast<int>(chains_.size()) - 1;
}

void ChainStore::append(int chain, const Eigen::VectorXd& rho, double sigma2,
                        double log_post) {
    Chain& c = chains_.at(chain);
    if (rho.size() != n_params()) {
        throw ConfigError("appended sample has wrong dimension");
    }
    c.samples.insert(c.samples.end(), rho.data(), rho.data() + rho.size());
    c.sigma2.push_back(sigma2);
    c.log_post.push_back(log_post);
}

long ChainStore::length(int chain) const {
    return static_cast<long>(chains_.at(chain).sigma2.size());
}

long ChainStore::burn_in_length(int chain) const {
    return static_cast<long>(std::floor(burn_in_fraction_ * static_cast<double>(length(chain))));
}

long ChainStore::post_burn_length(int chain) const {
    return length(chain) - burn_in_length(chain);
}

const std::string& ChainStore::label(int chain) const {
    return chains_.at(chain).label;
}

std::uint64_t ChainStore::seed(int chain) const {
    return chains_.at(chain).seed;
}

double ChainStore::sample(int chain, long iter, int param) const {
    return chains_.at(chain).samples[iter * n_params() + param];
}

double ChainStore::sigma2(int chain, long iter) const {
    return chains_.at(chain).sigma2[iter];
}

double ChainStore::log_post(int chain, long iter) const {
    return chains_.at(chain).log_post[iter];
}

std::vector<double> ChainStore::parameter_series(int chain, int param,
                                                 bool post_burn_in) const {
    const long k = length(chain);
    const long start = post_burn_in ? burn_in_length(chain) : 0;
    std::vector<double> out;
    out.reserve(k - start);
    for (long i = start; i < k; ++i) {
        out.push_back(sample(chain, i, param));
    }
    return out;
}

void ChainStore::dump(const std::string& directory) const {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    json manifest;
    manifest["burn_in_fraction"] = burn_in_fraction_;
    manifest["parameters"] = param_names_;
    manifest["chains"] = json::array();
    for (const auto& c : chains_) {
        const std::string file = "chain_" + c.label + ".csv";
        std::ofstream out(fs::path(directory) / file);
        if (!out) {
            throw ConfigError("cannot write chain dump in " + directory);
        }
        out << "iter,log_post,sigma2";
        for (const auto& p : param_names_) {
            out << "," << p;
        }
        out << "\n";
        const long k = static_cast<long>(c.sigma2.size());
        for (long i = 0; i < k; ++i) {
            out << (i + 1) << "," << format_double(c.log_post[i]) << ","
                << format_double(c.sigma2[i]);
            for (int p = 0; p < n_params(); ++p) {
                out << "," << format_double(c.samples[i * n_params() + p]);
            }
            out << "\n";
        }
        json entry;
        entry["label"] = c.label;
        entry["seed"] = c.seed;
        entry["length"] = k;
        entry["file"] = file;
        manifest["chains"].push_back(entry);
    }
    std::ofstream mf(fs::path(directory) / "manifest.json");
    mf << manifest.dump(2) << "\n";
}

ChainStore ChainStore::load(const std::string& directory) {
    namespace fs = std::filesystem;
    const fs::path mf_path = fs::path(directory) / "manifest.json";
    std::ifstream mf(mf_path);
    if (!mf) {
        throw ConfigError("cannot open manifest: " + mf_path.string());
    }
    json manifest;
    try {
        mf >> manifest;
    } catch (const json::parse_error& e) {
        throw ConfigError("manifest parse error: " + std::string(e.what()));
    }
    ChainStore store(manifest.at("parameters").get<std::vector<std::string>>(),
                     manifest.at("burn_in_fraction").get<double>());
    for (const auto& entry : manifest.at("chains")) {
        const int idx = store.add_chain(entry.at("label").get<std::string>(),
                                        entry.at("seed").get<std::uint64_t>());
        const CsvTable table =
            read_csv((fs::path(directory) / entry.at("file").get<std::string>()).string());
        std::vector<std::string> expected = {"iter", "log_post", "sigma2"};
        for (const auto& p : store.param_names_) {
            expected.push_back(p);
        }
        if (table.header != expected) {
            throw SchemaError("chain dump columns do not match the manifest parameters");
        }
        Eigen::VectorXd rho(store.n_params());
        for (const auto& row : table.rows) {
            for (int p = 0; p < store.n_params(); ++p) {
                rho[p] = row[3 + p];
            }
            store.append(idx, rho, row[2], row[1]);
        }
    }
    return store;
}

bool ChainStore::equals(const ChainStore& other) const {
    if (param_names_ != other.param_names_ || burn_in_fraction_ != other.burn_in_fraction_
        || chains_.size() != other.chains_.size()) {
        return false;
    }
    for (size_t i = 0; i < chains_.size(); ++i) {
        const Chain& a = chains_[i];
        const Chain& b = other.chains_[i];
        if (a.label != b.label || a.seed != b.seed || a.samples != b.samples
            || a.sigma2 != b.sigma2 || a.log_post != b.log_post) {
            return false;
        }
    }
    return true;
}

} // namespace elute
