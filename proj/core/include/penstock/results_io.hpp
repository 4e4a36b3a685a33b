#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "penstock/simulation.hpp"

namespace penstock {

/// FNV-1a 64-bit content hash, used to fingerprint inputs in results.
std::uint64_t fnv1a_hash(std::string_view data);
std::uint64_t trace_hash(const FrequencyTrace& trace);

/// Column-major numeric table with a header row.
struct TraceTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;

    const std::vector<double>& column(const std::string& name) const;
};

/// Stored traces: one row per (decimated) sample, doubles printed with 17
/// significant digits so reloading reproduces them exactly.
void write_traces_csv(const SimulationResult& result, const std::string& path);
TraceTable read_csv(const std::string& path);

/// Deterministic metrics (no wall-clock times).
std::string metrics_to_json(const SimulationResult& result);
void write_metrics_json(const SimulationResult& result, const std::string& path);

/// Solver timing diagnostics (not deterministic across runs).
std::string solver_stats_to_json(const SimulationResult& result);

std::string comparison_to_json(const ComparisonReport& report);
void write_comparison_csv(const ComparisonReport& report, const std::string& path);

/// Writes metrics.json, stats.json, config.toml and traces.csv for one run.
void write_run_directory(const SimulationResult& result, const std::string& dir);

/// Writes comparison.csv, comparison.json, config.toml and per-run outputs.
void write_comparison_directory(const ComparisonReport& report, const std::string& dir);

/// Creates the directory (and parents) if missing.
void ensure_directory(const std::string& path);

/// Root for run directories: $PENSTOCK_RUN_ROOT or the current directory.
std::string run_root();

}  // namespace penstock
