#include "elute/report.hpp"

#include "elute/csv.hpp"
#include "elute/errors.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace elute {

namespace {

std::string fmt(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

void print_rhat_line(std::ostream& os, const ChainStore& store, const RhatReport& report) {
    for (int i = 0; i < store.n_params(); ++i) {
        os << "    " << store.param_names()[i] << ": " << fmt(report.rhat[i]) << "\n";
    }
    os << "    max: " << fmt(report.max()) << "  (threshold " << fmt(report.threshold, "%.2f")
       << ", k = " << report.k << ")\n";
}

std::string chain_set(const ChainStore& store, const std::vector<int>& chains) {
    std::string out = "{";
    for (size_t i = 0; i < chains.size(); ++i) {
        out += store.label(chains[i]);
        if (i + 1 < chains.size()) {
            out += ", ";
        }
    }
    return out + "}";
}

} // namespace

std::string render_diagnostic_report(const DiagnosticVerdict& verdict, const ChainStore& store,
                                     const DiagnosticsConfig& config) {
    std::ostringstream os;
    os << "convergence diagnostic report\n";
    os << "=============================\n";
    os << "chains:";
    for (int c = 0; c < store.n_chains(); ++c) {
        os << " " << store.label(c) << "(k=" << store.length(c) << ")";
    }
    os << "\nburn-in fraction: " << fmt(store.burn_in_fraction(), "%.2f") << "\n\n";

    os << "global R-hat:\n";
    print_rhat_line(os, store, verdict.global);
    os << "global ESS:\n";
    for (int i = 0; i < store.n_params(); ++i) {
        os << "    " << store.param_names()[i] << ": " << fmt(verdict.global_ess[i], "%.1f")
           << "\n";
    }
    os << "\n";

    if (!verdict.clustered) {
        os << "all parameters mix globally; no clustering performed\n";
    } else {
        os << "global mixing failed; clustering chains on KDE features (s = "
           << config.feature_points << ")\n\n";
        if (!verdict.elbow.distortions.empty()) {
            os << "K vs distortion:\n";
            for (size_t i = 0; i < verdict.elbow.distortions.size(); ++i) {
                os << "    " << (i + 1) << "  " << fmt(verdict.elbow.distortions[i], "%.6g")
                   << "\n";
            }
            os << "optimal K (elbow): " << verdict.elbow.k
               << (verdict.elbow.no_knee ? "  [no knee detected]" : "") << "\n";
        }
        os << "clustering method: " << cluster_method_name(verdict.assignment.method)
           << ", K = " << verdict.assignment.k << "\n\n";

        for (size_t j = 0; j < verdict.clusters.size(); ++j) {
            const auto& cd = verdict.clusters[j];
            os << "cluster " << j << " " << chain_set(store, cd.chains) << ":\n";
            if (cd.assessable && cd.rhat) {
                print_rhat_line(os, store, *cd.rhat);
                os << "    converged: " << (cd.converged ? "yes" : "no") << "\n";
            } else {
                os << "    R-hat not computable (single chain)\n";
            }
            os << "    ESS:";
            for (int i = 0; i < store.n_params(); ++i) {
                os << " " << fmt(cd.ess[i], "%.1f");
            }
            os << "\n";
        }
        os << "\nlinkage (average, euclidean):\n";
        for (const auto& m : verdict.linkage.merges) {
            os << "    " << m.left << " + " << m.right << " -> d = " << fmt(m.distance, "%.6g")
               << " (size " << m.size << ")\n";
        }
    }

    for (const auto& w : verdict.warnings) {
        os << "warning: " << w << "\n";
    }
    os << "\nverdict: " << verdict_status_name(verdict.status) << "\n";
    return os.str();
}

void write_diagnostic_report(const std::string& directory, const DiagnosticVerdict& verdict,
                             const ChainStore& store, const DiagnosticsConfig& config) {
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    {
        std::ofstream out(fs::path(directory) / "report.txt");
        if (!out) {
            throw ConfigError("cannot write report in " + directory);
        }
        out << render_diagnostic_report(verdict, store, config);
    }
    if (!verdict.elbow.distortions.empty()) {
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < verdict.elbow.distortions.size(); ++i) {
            rows.push_back({static_cast<double>(i + 1), verdict.elbow.distortions[i]});
        }
        write_csv((fs::path(directory) / "elbow.csv").string(), {"k", "distortion"}, rows);
    }
    if (!verdict.linkage.merges.empty()) {
        std::vector<std::vector<double>> rows;
        for (const auto& m : verdict.linkage.merges) {
            rows.push_back({static_cast<double>(m.left), static_cast<double>(m.right),
                            m.distance, static_cast<double>(m.size)});
        }
        write_csv((fs::path(directory) / "linkage.csv").string(),
                  {"left", "right", "distance", "size"}, rows);
    }
    if (verdict.clustered) {
        std::vector<std::vector<double>> rows;
        for (size_t c = 0; c < verdict.assignment.labels.size(); ++c) {
            rows.push_back({static_cast<double>(c),
                            static_cast<double>(verdict.assignment.labels[c])});
        }
        write_csv((fs::path(directory) / "clusters.csv").string(), {"chain", "cluster"}, rows);
    }
}

} // namespace elute
