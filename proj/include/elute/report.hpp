#pragma once

#include "elute/chain_store.hpp"
#include "elute/diagnostics.hpp"

#include <string>

namespace elute {

std::string render_diagnostic_report(const DiagnosticVerdict& verdict, const ChainStore& store,
                                     const DiagnosticsConfig& config);

/// Writes report.txt plus flat CSVs (elbow.csv, linkage.csv, clusters.csv)
/// into `directory`.
void write_diagnostic_report(const std::string& directory, const DiagnosticVerdict& verdict,
                             const ChainStore& store, const DiagnosticsConfig& config);

} // namespace elute
