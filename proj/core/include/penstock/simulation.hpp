#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "penstock/config.hpp"
#include "penstock/electromech.hpp"
#include "penstock/frequency_trace.hpp"
#include "penstock/mpc.hpp"

namespace penstock {

enum class ControllerKind { base, mpc, lpf, fatigue_filter };

std::string to_string(ControllerKind kind);
ControllerKind controller_from_string(const std::string& name);

struct ExperimentSpec {
    Config config;
    ControllerKind controller = ControllerKind::base;
    FrequencyTrace trace;
};

struct SolveStatsSummary {
    int count = 0;
    double mean_time_s = 0.0;
    double p99_time_s = 0.0;
    double max_time_s = 0.0;
    double mean_iterations = 0.0;
    int degraded_count = 0;
    double max_slack_m = 0.0;
    /// Worst predicted band violation beyond the slack over all solves.
    double max_band_violation_m = 0.0;
};

/// Closed-loop run output: stored traces share one decimated time grid;
/// metrics are computed at full plant resolution with the warmup excluded.
struct SimulationResult {
    ControllerKind controller = ControllerKind::base;
    std::string trace_source;
    std::string config_echo;  ///< fully resolved TOML
    bool aborted = false;
    std::string abort_reason;

    double plant_dt_s = 0.0;
    int trace_stride = 1;
    std::vector<double> time_s;
    std::vector<double> grid_frequency_hz;      ///< raw trace
    std::vector<double> governor_frequency_hz;  ///< after pre-filtering
    std::vector<double> vane_reference;         ///< y* of the unfiltered governor
    std::vector<double> vane_actuated;          ///< applied to the plant
    std::vector<double> rotor_speed_rad_s;
    std::vector<double> electrical_power_w;
    std::vector<std::vector<double>> heads_m;   ///< [element][sample]

    /// Full-rate vane traces kept for exact metric computation.
    std::vector<double> full_vane_reference;
    std::vector<double> full_vane_actuated;

    HeadBounds bounds;
    std::vector<double> steady_heads_m;
    std::vector<double> sigma_nominal_pa;  ///< per element at the initial steady state
    double correlation_cc = 0.0;
    std::vector<double> damage;  ///< per element
    int critical_element = -1;   ///< 0-based argmax of damage
    /// Fraction of post-warmup (element, sample) pairs inside the band
    /// widened by 2% of the half band.
    double band_compliance = 1.0;
    double worst_band_excursion_m = 0.0;

    SolveStatsSummary mpc_stats;
    std::vector<double> solve_times_s;  ///< per MPC solve, diagnostics only
};

/// First full-resolution sample index included in the metrics.
std::size_t metrics_start_index(double warmup_s, double dt_s);

/// Pearson correlation; throws ParameterError on length mismatch, fewer
/// than two samples, or zero variance.
double correlation(std::span<const double> a, std::span<const double> b);

/// Runs the closed-loop procedure: frequency in, governor, optional MPC or
/// trace pre-filter, nonlinear plant, swing-equation generator, fatigue
/// bookkeeping on the nonlinear heads.
SimulationResult run_simulation(const ExperimentSpec& spec);

struct ComparisonRow {
    ControllerKind controller = ControllerKind::base;
    double cc = 0.0;
    double max_rdi = 0.0;
    int critical_element = -1;  ///< 0-based
    double mean_solve_ms = 0.0;
    double p99_solve_ms = 0.0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::vector<std::vector<double>> rdi_per_element;  ///< [run][element]
    std::vector<SimulationResult> results;
    std::string trace_source;
};

/// Runs every spec (which must share plant config and trace; a base run is
/// required for the RDI normalization) and tabulates CC, RDI and solver
/// statistics.
ComparisonReport compare_controllers(const std::vector<ExperimentSpec>& specs);

/// Islanded speed-loop probe for the Ziegler-Nichols sweep: proportional-only
/// governor on the rotor speed with the full nonlinear hydraulics, constant
/// load torque, no grid coupling. Returns the speed-error trace.
LoopProbe make_islanded_speed_probe(const Config& config, double probe_duration_s = 80.0);

struct FatigueFilterTuneResult {
    double band_scale = 0.0;
    double achieved_max_rdi = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Bisects the fatigue filter's trim-band scale until the experiment's max
/// RDI matches the target within tol (RDI grows with the scale).
FatigueFilterTuneResult tune_fatigue_filter_scale(
    double target_max_rdi, const std::function<double(double)>& rdi_of_scale,
    double scale_lo = 0.02, double scale_hi = 2.0, double tol = 0.05, int max_iterations = 24);

}  // namespace penstock
