#include "penstock/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "penstock/errors.hpp"
#include "penstock/fatigue.hpp"
#include "penstock/filters.hpp"

namespace penstock {

std::string to_string(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::base: return "base";
        case ControllerKind::mpc: return "mpc";
        case ControllerKind::lpf: return "lpf";
        case ControllerKind::fatigue_filter: return "fatigue-filter";
    }
    return "unknown";
}

ControllerKind controller_from_string(const std::string& name) {
    if (name == "base") return ControllerKind::base;
    if (name == "mpc") return ControllerKind::mpc;
    if (name == "lpf") return ControllerKind::lpf;
    if (name == "fatigue-filter" || name == "ff") return ControllerKind::fatigue_filter;
    throw ParameterError("unknown controller: " + name);
}

std::size_t metrics_start_index(double warmup_s, double dt_s) {
    return static_cast<std::size_t>(std::ceil(warmup_s / dt_s - 1e-9));
}

double correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ParameterError("correlation: length mismatch");
    if (a.size() < 2) throw ParameterError("correlation: need at least two samples");
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= n;
    mean_b /= n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (!(var_a > 0.0) || !(var_b > 0.0)) {
        throw ParameterError("correlation: zero variance");
    }
    return cov / (std::sqrt(var_a) * std::sqrt(var_b));
}

namespace {

struct ControllerSetup {
    std::vector<double> governor_frequency_hz;  // trace fed to the governor
    bool filtered = false;
};

ControllerSetup prepare_frequency_input(const ExperimentSpec& spec,
                                        const std::vector<double>& raw_hz, double dt,
                                        const CircuitModel& circuit, const StateVector& steady,
                                        double operating_vane,
                                        const std::vector<double>& sigma_nominal) {
    ControllerSetup setup;
    const Config& cfg = spec.config;
    switch (spec.controller) {
        case ControllerKind::base:
        case ControllerKind::mpc:
            setup.governor_frequency_hz = raw_hz;
            break;
        case ControllerKind::lpf:
            setup.governor_frequency_hz = lpf_filter_trace(cfg.lpf.cutoff_hz, raw_hz, dt);
            setup.filtered = true;
            break;
        case ControllerKind::fatigue_filter: {
            int element = cfg.fatigue_filter.element > 0 ? cfg.fatigue_filter.element - 1
                                                         : cfg.plant.element_count - 1;
            const FrequencyStressModel model = FrequencyStressModel::build(
                circuit, steady, operating_vane, cfg.governor, cfg.plant.grid_frequency_hz, dt,
                element);
            const double sigma_c = sigma_nominal[static_cast<std::size_t>(element)];
            const double half = 0.5 * cfg.sn.fatigue_limit_pa * cfg.fatigue_filter.band_scale;
            const FatigueFilter filter(model, sigma_c - half, sigma_c + half,
                                       cfg.fatigue_filter.regularization,
                                       cfg.fatigue_filter.max_passes);
            setup.governor_frequency_hz = fatigue_filter_preprocess(filter, raw_hz);
            setup.filtered = true;
            break;
        }
    }
    return setup;
}

SolveStatsSummary summarize(const std::vector<double>& times, const std::vector<int>& iterations,
                            int degraded, double max_slack, double max_violation) {
    SolveStatsSummary s;
    s.count = static_cast<int>(times.size());
    if (s.count == 0) return s;
    s.mean_time_s = std::accumulate(times.begin(), times.end(), 0.0) / times.size();
    std::vector<double> sorted(times);
    std::sort(sorted.begin(), sorted.end());
    const auto p99_idx = static_cast<std::size_t>(
        std::min<double>(sorted.size() - 1.0, std::ceil(0.99 * sorted.size()) - 1.0));
    s.p99_time_s = sorted[p99_idx];
    s.max_time_s = sorted.back();
    s.mean_iterations =
        std::accumulate(iterations.begin(), iterations.end(), 0.0) / iterations.size();
    s.degraded_count = degraded;
    s.max_slack_m = max_slack;
    s.max_band_violation_m = max_violation;
    return s;
}

}  // namespace

SimulationResult run_simulation(const ExperimentSpec& spec) {
    const Config cfg = spec.config.materialized();
    spec.trace.validate();

    const PlantParameters& plant = cfg.plant;
    const int n_el = plant.element_count;
    const double dt = cfg.sim.plant_dt_s;
    const auto steps = static_cast<std::size_t>(std::llround(cfg.sim.duration_s / dt));
    if (spec.trace.duration_s() + 1e-9 < cfg.sim.duration_s) {
        throw ParameterError("run_simulation: frequency trace shorter than the run duration");
    }

    const CircuitModel circuit = build_circuit(plant, plant.nominal_discharge_m3s);
    const double vane0 = cfg.sim.operating_point;
    const StateVector steady = steady_state(circuit, vane0, plant.upstream_head_m,
                                            plant.downstream_head_m);

    SimulationResult res;
    res.controller = spec.controller;
    res.trace_source = spec.trace.source;
    res.config_echo = cfg.to_toml();
    res.plant_dt_s = dt;
    res.trace_stride = cfg.sim.trace_stride;

    res.steady_heads_m.resize(n_el);
    res.sigma_nominal_pa.resize(n_el);
    for (int i = 0; i < n_el; ++i) {
        res.steady_heads_m[static_cast<std::size_t>(i)] = steady.head(i);
        res.sigma_nominal_pa[static_cast<std::size_t>(i)] =
            stress_from_head(steady.head(i), plant.elevation_m(i), plant);
    }
    const double h_nom =
        std::accumulate(res.steady_heads_m.begin(), res.steady_heads_m.end(), 0.0) / n_el;
    res.bounds = head_bounds(cfg.sn, plant, h_nom);

    // Raw frequency samples on the plant grid.
    std::vector<double> raw_hz(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        raw_hz[k] = spec.trace.at(static_cast<double>(k) * dt);
    }
    const ControllerSetup setup =
        prepare_frequency_input(spec, raw_hz, dt, circuit, steady, vane0, res.sigma_nominal_pa);

    // Governors: the reference governor always consumes the raw trace; the
    // main one consumes the (possibly filtered) controller input.
    GovernorState gov_main = GovernorState::at_setpoint(vane0);
    GovernorState gov_ref = GovernorState::at_setpoint(vane0);
    const double f0 = plant.grid_frequency_hz;
    const double p_ref = vane0;
    const std::size_t governor_stride =
        cfg.sim.governor_dt_s > 0.0
            ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.sim.governor_dt_s / dt)))
            : 1;

    // Generator at its equilibrium against the first frequency sample.
    const GeneratorParams gen_params = cfg.generator.build(plant);
    const double h_t0 = turbine_head(steady.turbine_flow(), vane0, plant);
    const double omega_grid0 =
        2.0 * M_PI * raw_hz[0] / static_cast<double>(gen_params.pole_pairs);
    const double t_m0 = turbine_torque(steady.turbine_flow(), h_t0, omega_grid0, plant);
    GeneratorState gen;
    gen.rotor_speed_rad_s = omega_grid0;
    gen.rotor_angle_rad = std::asin(t_m0 / gen_params.sync_torque_nm_per_rad);

    // MPC.
    const bool use_mpc = spec.controller == ControllerKind::mpc;
    MpcController mpc_ctrl(circuit, cfg.mpc, res.bounds);
    const std::size_t mpc_stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.mpc.dt_s / dt)));
    std::vector<int> mpc_iterations;
    int mpc_degraded = 0;
    double mpc_max_slack = 0.0;
    double mpc_max_violation = 0.0;

    // Metric accumulators (full rate, warmup excluded).
    const std::size_t start = metrics_start_index(cfg.sim.warmup_s, dt);
    std::vector<RainflowCounter> counters(static_cast<std::size_t>(n_el));
    const double band_tol = 0.02 * res.bounds.half_band_m();
    std::size_t compliance_total = 0;
    std::size_t compliance_ok = 0;
    double worst_excursion = 0.0;

    res.full_vane_reference.reserve(steps + 1);
    res.full_vane_actuated.reserve(steps + 1);

    const auto stride = static_cast<std::size_t>(cfg.sim.trace_stride);
    const std::size_t stored = steps / stride + 1;
    res.time_s.reserve(stored);
    res.grid_frequency_hz.reserve(stored);
    res.governor_frequency_hz.reserve(stored);
    res.vane_reference.reserve(stored);
    res.vane_actuated.reserve(stored);
    res.rotor_speed_rad_s.reserve(stored);
    res.electrical_power_w.reserve(stored);
    res.heads_m.assign(static_cast<std::size_t>(n_el), {});
    for (auto& h : res.heads_m) h.reserve(stored);

    StateVector x = steady;
    double y_applied = vane0;
    double t_e = t_m0;

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t_now = static_cast<double>(k) * dt;
        const double f_raw = raw_hz[k];
        const double f_gov = setup.governor_frequency_hz[k];

        if (k % governor_stride == 0) {
            const double gdt = dt * static_cast<double>(governor_stride);
            gov_main = governor_step(gov_main, f_gov, p_ref, gdt, cfg.governor, f0);
            gov_ref = setup.filtered ? governor_step(gov_ref, f_raw, p_ref, gdt, cfg.governor, f0)
                                     : gov_main;
        }
        const double y_star_ref = gov_ref.vane_setpoint;
        const double y_star_main = gov_main.vane_setpoint;

        if (use_mpc) {
            if (k % mpc_stride == 0) {
                const MpcSolution sol =
                    mpc_ctrl.step(x, y_star_main, y_applied, plant.upstream_head_m,
                                  plant.downstream_head_m);
                y_applied = sol.first_vane;
                res.solve_times_s.push_back(sol.solve_time_s);
                mpc_iterations.push_back(sol.iterations);
                if (sol.degraded) ++mpc_degraded;
                mpc_max_slack = std::max(mpc_max_slack, sol.max_slack_m);
                mpc_max_violation = std::max(mpc_max_violation, sol.max_band_violation_m);
            }
        } else {
            y_applied = y_star_main;
        }

        // Record the sample at t_now.
        res.full_vane_reference.push_back(y_star_ref);
        res.full_vane_actuated.push_back(y_applied);
        if (k >= start) {
            for (int i = 0; i < n_el; ++i) {
                const double h = x.head(i);
                counters[static_cast<std::size_t>(i)].push(h);
                ++compliance_total;
                const double over = h - res.bounds.upper_m;
                const double under = res.bounds.lower_m - h;
                const double excursion = std::max({over, under, 0.0});
                worst_excursion = std::max(worst_excursion, excursion);
                if (excursion <= band_tol) ++compliance_ok;
            }
        }
        if (k % stride == 0) {
            res.time_s.push_back(t_now);
            res.grid_frequency_hz.push_back(f_raw);
            res.governor_frequency_hz.push_back(f_gov);
            res.vane_reference.push_back(y_star_ref);
            res.vane_actuated.push_back(y_applied);
            res.rotor_speed_rad_s.push_back(gen.rotor_speed_rad_s);
            res.electrical_power_w.push_back(t_e * gen.rotor_speed_rad_s);
            for (int i = 0; i < n_el; ++i) {
                res.heads_m[static_cast<std::size_t>(i)].push_back(x.head(i));
            }
        }
        if (k == steps) break;

        // Advance plant and rotor to t + dt.
        try {
            x = step_rk4(x, {y_applied, plant.upstream_head_m, plant.downstream_head_m}, circuit,
                         dt);
            const double h_t = turbine_head(x.turbine_flow(), y_applied, plant);
            const double t_m =
                turbine_torque(x.turbine_flow(), h_t, gen.rotor_speed_rad_s, plant);
            const GeneratorOutput out = generator_step(gen, gen_params, t_m, f_raw, dt);
            gen = out.state;
            t_e = out.electrical_torque_nm;
        } catch (const InstabilityError& e) {
            res.aborted = true;
            res.abort_reason = e.what();
            break;
        } catch (const LossOfSynchronismError& e) {
            res.aborted = true;
            res.abort_reason = e.what();
            break;
        }
    }

    // Fatigue from the nonlinear heads: cycles counted on the head series,
    // ranges converted to stress by the hoop gain.
    const double stress_gain = plant.head_to_pressure_pa_per_m() * plant.penstock_diameter_m /
                               (2.0 * plant.wall_thickness_m);
    res.damage.resize(static_cast<std::size_t>(n_el));
    for (int i = 0; i < n_el; ++i) {
        CycleSet cycles = counters[static_cast<std::size_t>(i)].finish();
        for (Cycle& c : cycles) c.range *= stress_gain;
        res.damage[static_cast<std::size_t>(i)] = damage_index(cycles, cfg.sn);
    }
    res.critical_element = static_cast<int>(
        std::max_element(res.damage.begin(), res.damage.end()) - res.damage.begin());

    if (res.full_vane_reference.size() > start + 1) {
        const std::span<const double> ref(res.full_vane_reference);
        const std::span<const double> act(res.full_vane_actuated);
        try {
            res.correlation_cc = correlation(ref.subspan(start), act.subspan(start));
        } catch (const ParameterError&) {
            res.correlation_cc = 1.0;  // constant traces: treat as perfect tracking
        }
    }
    res.band_compliance = compliance_total
                              ? static_cast<double>(compliance_ok) /
                                    static_cast<double>(compliance_total)
                              : 1.0;
    res.worst_band_excursion_m = worst_excursion;
    res.mpc_stats = summarize(res.solve_times_s, mpc_iterations, mpc_degraded, mpc_max_slack,
                              mpc_max_violation);
    return res;
}

ComparisonReport compare_controllers(const std::vector<ExperimentSpec>& specs) {
    if (specs.empty()) throw ParameterError("compare_controllers: no experiments");

    const std::string reference_config = specs.front().config.materialized().to_toml();
    for (const ExperimentSpec& s : specs) {
        if (s.config.materialized().to_toml() != reference_config) {
            throw ParameterError("compare_controllers: experiments use different plant configs");
        }
        if (s.trace.source != specs.front().trace.source ||
            s.trace.samples_hz != specs.front().trace.samples_hz) {
            throw ParameterError("compare_controllers: experiments use different traces");
        }
    }

    ComparisonReport report;
    report.trace_source = specs.front().trace.source;
    for (const ExperimentSpec& s : specs) {
        report.results.push_back(run_simulation(s));
    }

    const auto base_it =
        std::find_if(report.results.begin(), report.results.end(),
                     [](const SimulationResult& r) { return r.controller == ControllerKind::base; });
    if (base_it == report.results.end()) {
        throw ParameterError("compare_controllers: a 'base' run is required for RDI");
    }

    for (const SimulationResult& r : report.results) {
        const std::vector<double> rdi_vec = rdi(r.damage, base_it->damage);
        report.rdi_per_element.push_back(rdi_vec);
        ComparisonRow row;
        row.controller = r.controller;
        row.cc = r.correlation_cc;
        row.max_rdi = *std::max_element(rdi_vec.begin(), rdi_vec.end());
        row.critical_element = r.critical_element;
        row.mean_solve_ms = r.mpc_stats.mean_time_s * 1e3;
        row.p99_solve_ms = r.mpc_stats.p99_time_s * 1e3;
        report.rows.push_back(row);
    }
    return report;
}

LoopProbe make_islanded_speed_probe(const Config& config, double probe_duration_s) {
    const Config cfg = config.materialized();
    return [cfg, probe_duration_s](double gain) {
        const PlantParameters& plant = cfg.plant;
        const double dt = cfg.sim.plant_dt_s;
        const auto steps = static_cast<std::size_t>(probe_duration_s / dt);
        const double vane0 = cfg.sim.operating_point;

        const CircuitModel circuit = build_circuit(plant, plant.nominal_discharge_m3s);
        StateVector x = steady_state(circuit, vane0, plant.upstream_head_m,
                                     plant.downstream_head_m);
        const GeneratorParams gen = cfg.generator.build(plant);
        const double omega_nom = plant.nominal_pulsation_rad_s();
        const double f0 = plant.grid_frequency_hz;

        const double h_t0 = turbine_head(x.turbine_flow(), vane0, plant);
        const double t_load = turbine_torque(x.turbine_flow(), h_t0, omega_nom, plant);

        GovernorConfig probe_gov = cfg.governor;
        probe_gov.kp = gain;
        probe_gov.ki = 0.0;
        probe_gov.vane_rate_limit = 1e6;  // keep the probe in the linear regime
        probe_gov.deadband_hz = 0.0;
        GovernorState gov = GovernorState::at_setpoint(vane0);

        double omega = omega_nom * 1.001;  // small initial speed offset
        std::vector<double> error_trace;
        error_trace.reserve(steps);
        for (std::size_t k = 0; k < steps; ++k) {
            const double f_meas =
                omega * static_cast<double>(plant.pole_pairs) / (2.0 * M_PI);
            error_trace.push_back((f0 - f_meas) / f0);
            gov = governor_step(gov, f_meas, vane0, dt, probe_gov, f0);
            try {
                x = step_rk4(x, {gov.vane_setpoint, plant.upstream_head_m,
                                 plant.downstream_head_m},
                             circuit, dt);
            } catch (const InstabilityError&) {
                error_trace.push_back(std::numeric_limits<double>::quiet_NaN());
                break;
            }
            const double h_t = turbine_head(x.turbine_flow(), gov.vane_setpoint, plant);
            const double t_m = turbine_torque(x.turbine_flow(), h_t, omega, plant);
            omega += dt * (t_m - t_load) / gen.inertia_kgm2;
            if (!std::isfinite(omega) || omega <= 0.1 * omega_nom || omega >= 3.0 * omega_nom) {
                error_trace.push_back(std::numeric_limits<double>::quiet_NaN());
                break;
            }
        }
        return error_trace;
    };
}

FatigueFilterTuneResult tune_fatigue_filter_scale(
    double target_max_rdi, const std::function<double(double)>& rdi_of_scale, double scale_lo,
    double scale_hi, double tol, int max_iterations) {
    if (!(scale_lo > 0.0 && scale_hi > scale_lo)) {
        throw ParameterError("tune_fatigue_filter_scale: invalid bracket");
    }
    FatigueFilterTuneResult best;
    const auto consider = [&](double scale, double value) {
        if (best.iterations == 0 ||
            std::abs(value - target_max_rdi) < std::abs(best.achieved_max_rdi - target_max_rdi)) {
            best.band_scale = scale;
            best.achieved_max_rdi = value;
        }
        ++best.iterations;
    };

    double lo = scale_lo, hi = scale_hi;
    double rdi_lo = rdi_of_scale(lo);
    consider(lo, rdi_lo);
    if (std::abs(rdi_lo - target_max_rdi) <= tol) {
        best.converged = true;
        return best;
    }
    double rdi_hi = rdi_of_scale(hi);
    consider(hi, rdi_hi);
    if (std::abs(rdi_hi - target_max_rdi) <= tol) {
        best.converged = true;
        return best;
    }
    if ((rdi_lo - target_max_rdi) * (rdi_hi - target_max_rdi) > 0.0) {
        return best;  // target outside the bracket
    }
    for (int i = 0; i < max_iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double value = rdi_of_scale(mid);
        consider(mid, value);
        if (std::abs(value - target_max_rdi) <= tol) {
            best.converged = true;
            return best;
        }
        if ((value - target_max_rdi) * (rdi_lo - target_max_rdi) > 0.0) {
            lo = mid;
            rdi_lo = value;
        } else {
            hi = mid;
        }
    }
    best.converged = std::abs(best.achieved_max_rdi - target_max_rdi) <= tol;
    return best;
}

}  // namespace penstock
