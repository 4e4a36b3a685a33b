#include "penstock/results_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "penstock/errors.hpp"

namespace penstock {

using nlohmann::json;

std::uint64_t fnv1a_hash(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const char c : data) {
        hash ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t trace_hash(const FrequencyTrace& trace) {
    std::string bytes(reinterpret_cast<const char*>(trace.samples_hz.data()),
                      trace.samples_hz.size() * sizeof(double));
    bytes += trace.source;
    return fnv1a_hash(bytes);
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const std::vector<double>& TraceTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw IngestionError("trace table: no column " + name);
    return data[static_cast<std::size_t>(it - columns.begin())];
}

void write_traces_csv(const SimulationResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write traces file: " + path);

    out << "time_s,grid_frequency_hz,governor_frequency_hz,vane_reference,vane_actuated,"
           "rotor_speed_rad_s,electrical_power_w";
    const std::size_t n_el = result.heads_m.size();
    for (std::size_t i = 0; i < n_el; ++i) out << ",h" << (i + 1) << "_m";
    out << "\n";

    for (std::size_t k = 0; k < result.time_s.size(); ++k) {
        out << fmt(result.time_s[k]) << ',' << fmt(result.grid_frequency_hz[k]) << ','
            << fmt(result.governor_frequency_hz[k]) << ',' << fmt(result.vane_reference[k]) << ','
            << fmt(result.vane_actuated[k]) << ',' << fmt(result.rotor_speed_rad_s[k]) << ','
            << fmt(result.electrical_power_w[k]);
        for (std::size_t i = 0; i < n_el; ++i) out << ',' << fmt(result.heads_m[i][k]);
        out << "\n";
    }
}

TraceTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open csv file: " + path);

    TraceTable table;
    std::string line;
    if (!std::getline(in, line)) throw IngestionError(path + ": empty file");
    std::istringstream header(line);
    std::string name;
    while (std::getline(header, name, ',')) table.columns.push_back(name);
    table.data.resize(table.columns.size());

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ls, cell, ',')) {
            if (col >= table.columns.size()) {
                throw IngestionError(path + ": too many columns at row " + std::to_string(row));
            }
            table.data[col].push_back(std::strtod(cell.c_str(), nullptr));
            ++col;
        }
        if (col != table.columns.size()) {
            throw IngestionError(path + ": short row " + std::to_string(row));
        }
    }
    return table;
}

namespace {

json metrics_json(const SimulationResult& r) {
    json j;
    j["format_version"] = 1;
    j["controller"] = to_string(r.controller);
    j["trace_source"] = r.trace_source;
    j["config_hash"] = fnv1a_hash(r.config_echo);
    j["aborted"] = r.aborted;
    if (r.aborted) j["abort_reason"] = r.abort_reason;
    j["plant_dt_s"] = r.plant_dt_s;
    j["trace_stride"] = r.trace_stride;
    j["cc"] = r.correlation_cc;
    j["damage"] = r.damage;
    j["critical_element"] = r.critical_element + 1;  // 1-based in reports
    j["band_compliance"] = r.band_compliance;
    j["worst_band_excursion_m"] = r.worst_band_excursion_m;
    j["bounds"] = {{"lower_m", r.bounds.lower_m},
                   {"upper_m", r.bounds.upper_m},
                   {"nominal_m", r.bounds.nominal_m}};
    j["steady_heads_m"] = r.steady_heads_m;
    j["sigma_nominal_pa"] = r.sigma_nominal_pa;
    j["mpc"] = {{"solve_count", r.mpc_stats.count},
                {"mean_iterations", r.mpc_stats.mean_iterations},
                {"degraded_count", r.mpc_stats.degraded_count},
                {"max_slack_m", r.mpc_stats.max_slack_m},
                {"max_band_violation_m", r.mpc_stats.max_band_violation_m}};
    return j;
}

}  // namespace

std::string metrics_to_json(const SimulationResult& result) {
    return metrics_json(result).dump(2) + "\n";
}

void write_metrics_json(const SimulationResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write metrics file: " + path);
    out << metrics_to_json(result);
}

std::string solver_stats_to_json(const SimulationResult& result) {
    json j;
    j["solve_count"] = result.mpc_stats.count;
    j["mean_time_ms"] = result.mpc_stats.mean_time_s * 1e3;
    j["p99_time_ms"] = result.mpc_stats.p99_time_s * 1e3;
    j["max_time_ms"] = result.mpc_stats.max_time_s * 1e3;
    j["solve_times_ms"] = json::array();
    for (double t : result.solve_times_s) j["solve_times_ms"].push_back(t * 1e3);
    return j.dump(2) + "\n";
}

std::string comparison_to_json(const ComparisonReport& report) {
    json j;
    j["format_version"] = 1;
    j["trace_source"] = report.trace_source;
    j["rows"] = json::array();
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const ComparisonRow& row = report.rows[i];
        json r;
        r["controller"] = to_string(row.controller);
        r["cc"] = row.cc;
        r["max_rdi"] = row.max_rdi;
        r["critical_element"] = row.critical_element + 1;
        r["rdi_per_element"] = report.rdi_per_element[i];
        j["rows"].push_back(r);
    }
    return j.dump(2) + "\n";
}

void write_comparison_csv(const ComparisonReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write comparison file: " + path);
    out << "controller,cc,max_rdi,critical_element,mean_solve_ms,p99_solve_ms\n";
    for (const ComparisonRow& row : report.rows) {
        out << to_string(row.controller) << ',' << fmt(row.cc) << ',' << fmt(row.max_rdi) << ','
            << (row.critical_element + 1) << ',' << fmt(row.mean_solve_ms) << ','
            << fmt(row.p99_solve_ms) << "\n";
    }
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IngestionError("cannot create directory " + path + ": " + ec.message());
}

std::string run_root() {
    if (const char* env = std::getenv("PENSTOCK_RUN_ROOT"); env && *env) return env;
    return ".";
}

void write_run_directory(const SimulationResult& result, const std::string& dir) {
    ensure_directory(dir);
    const std::filesystem::path base(dir);
    write_traces_csv(result, (base / "traces.csv").string());
    write_metrics_json(result, (base / "metrics.json").string());
    std::ofstream stats(base / "stats.json");
    stats << solver_stats_to_json(result);
    std::ofstream config(base / "config.toml");
    config << result.config_echo;
}

void write_comparison_directory(const ComparisonReport& report, const std::string& dir) {
    ensure_directory(dir);
    const std::filesystem::path base(dir);
    write_comparison_csv(report, (base / "comparison.csv").string());
    std::ofstream json_out(base / "comparison.json");
    json_out << comparison_to_json(report);
    for (const SimulationResult& r : report.results) {
        write_run_directory(r, (base / to_string(r.controller)).string());
    }
}

}  // namespace penstock
