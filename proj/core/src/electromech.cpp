#include "penstock/electromech.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "penstock/errors.hpp"

namespace penstock {

void GovernorConfig::validate() const {
    if (!(permanent_droop > 0.0)) throw ParameterError("governor: permanent_droop must be > 0");
    if (!(vane_rate_limit > 0.0)) throw ParameterError("governor: vane_rate_limit must be > 0");
    if (!(deadband_hz >= 0.0)) throw ParameterError("governor: deadband_hz must be >= 0");
    if (!(vane_min < vane_max)) throw ParameterError("governor: vane_min must be < vane_max");
}

GovernorState governor_step(const GovernorState& state, double measured_frequency_hz,
                            double power_reference_pu, double dt, const GovernorConfig& config,
                            double nominal_frequency_hz) {
    if (!(dt > 0.0)) throw ParameterError("governor_step: dt must be positive");

    double df = nominal_frequency_hz - measured_frequency_hz;
    if (std::abs(df) <= config.deadband_hz) df = 0.0;

    const double error = (df / nominal_frequency_hz) / config.permanent_droop +
                         power_reference_pu - state.vane_setpoint;

    GovernorState next = state;
    next.integrator = state.integrator + config.ki * error * dt;
    const double raw = config.kp * error + next.integrator;

    const double max_delta = config.vane_rate_limit * dt;
    double limited = std::clamp(raw, state.vane_setpoint - max_delta, state.vane_setpoint + max_delta);
    limited = std::clamp(limited, config.vane_min, config.vane_max);

    if (limited != raw) {
        // Back-calculation anti-windup: keep the integrator consistent with
        // the limited output so the command resumes without overshoot.
        next.integrator = limited - config.kp * error;
    }
    next.vane_setpoint = limited;
    return next;
}

GeneratorParams GeneratorParams::from_plant(const PlantParameters& plant,
                                            double inertia_constant_s) {
    GeneratorParams g;
    const double omega0 = plant.nominal_speed_rad_s;
    g.inertia_kgm2 = 2.0 * inertia_constant_s * plant.rated_power_w / (omega0 * omega0);
    g.sync_torque_nm_per_rad = plant.nominal_torque_nm / std::sin(M_PI / 6.0);
    // Damping ratio ~0.7 of the small-signal swing mode at the design angle.
    g.damping_nms_per_rad =
        1.4 * std::sqrt(g.inertia_kgm2 * g.sync_torque_nm_per_rad * std::cos(M_PI / 6.0));
    g.pole_pairs = plant.pole_pairs;
    g.validate();
    return g;
}

void GeneratorParams::validate() const {
    if (!(inertia_kgm2 > 0.0)) throw ParameterError("generator: inertia must be > 0");
    if (!(sync_torque_nm_per_rad > 0.0)) throw ParameterError("generator: K_s must be > 0");
    if (!(damping_nms_per_rad >= 0.0)) throw ParameterError("generator: damping must be >= 0");
    if (pole_pairs < 1) throw ParameterError("generator: pole_pairs must be >= 1");
}

GeneratorOutput generator_step(const GeneratorState& gen, const GeneratorParams& params,
                               double mechanical_torque_nm, double grid_frequency_hz, double dt) {
    if (!(dt > 0.0)) throw ParameterError("generator_step: dt must be positive");

    const double omega_grid =
        2.0 * M_PI * grid_frequency_hz / static_cast<double>(params.pole_pairs);

    const auto rhs = [&](double delta, double omega, double& ddelta, double& domega) {
        const double t_e = params.sync_torque_nm_per_rad * std::sin(delta);
        ddelta = omega - omega_grid;
        domega = (mechanical_torque_nm - t_e -
                  params.damping_nms_per_rad * (omega - omega_grid)) /
                 params.inertia_kgm2;
    };

    double k1d, k1w, k2d, k2w, k3d, k3w, k4d, k4w;
    rhs(gen.rotor_angle_rad, gen.rotor_speed_rad_s, k1d, k1w);
    rhs(gen.rotor_angle_rad + 0.5 * dt * k1d, gen.rotor_speed_rad_s + 0.5 * dt * k1w, k2d, k2w);
    rhs(gen.rotor_angle_rad + 0.5 * dt * k2d, gen.rotor_speed_rad_s + 0.5 * dt * k2w, k3d, k3w);
    rhs(gen.rotor_angle_rad + dt * k3d, gen.rotor_speed_rad_s + dt * k3w, k4d, k4w);

    GeneratorOutput out;
    out.state.rotor_angle_rad =
        gen.rotor_angle_rad + (dt / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
    out.state.rotor_speed_rad_s =
        gen.rotor_speed_rad_s + (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    out.electrical_torque_nm =
        params.sync_torque_nm_per_rad * std::sin(out.state.rotor_angle_rad);

    if (std::abs(out.state.rotor_angle_rad) > M_PI / 2.0) {
        throw LossOfSynchronismError("rotor angle " +
                                     std::to_string(out.state.rotor_angle_rad) +
                                     " rad left the stable region");
    }
    return out;
}

namespace {

struct OscillationStats {
    double growth = 0.0;       ///< amplitude ratio of successive swings
    double period_s = 0.0;     ///< measured oscillation period
    bool oscillating = false;  ///< enough alternating swings found
};

OscillationStats analyze_trace(const std::vector<double>& trace, double dt) {
    OscillationStats st;
    std::size_t n = trace.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (!std::isfinite(trace[i])) {
            n = i;
            break;
        }
    }
    if (n < 8) {
        // A trace cut short by divergence counts as unbounded growth.
        if (n < trace.size()) st.growth = std::numeric_limits<double>::infinity();
        return st;
    }
    const bool truncated = n < trace.size();

    // Turning points of the error signal.
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = trace[i] - trace[i - 1];
        const double dr = trace[i + 1] - trace[i];
        if ((dl > 0.0 && dr < 0.0) || (dl < 0.0 && dr > 0.0)) idx.push_back(i);
    }
    if (idx.size() < 5) {
        if (truncated) st.growth = std::numeric_limits<double>::infinity();
        return st;
    }

    std::vector<double> swings;
    for (std::size_t j = 0; j + 1 < idx.size(); ++j) {
        swings.push_back(std::abs(trace[idx[j + 1]] - trace[idx[j]]));
    }
    // Geometric-mean amplitude ratio over the latter half of the swings,
    // where the initial transient has died out.
    std::size_t start = swings.size() / 2;
    if (start + 2 > swings.size()) start = swings.size() - 2;
    double log_sum = 0.0;
    int count = 0;
    for (std::size_t j = std::max<std::size_t>(start, 1); j < swings.size(); ++j) {
        if (swings[j - 1] > 0.0 && swings[j] > 0.0) {
            log_sum += std::log(swings[j] / swings[j - 1]);
            ++count;
        }
    }
    if (count == 0) {
        if (truncated) st.growth = std::numeric_limits<double>::infinity();
        return st;
    }
    st.oscillating = true;
    st.growth = truncated ? std::numeric_limits<double>::infinity() : std::exp(log_sum / count);

    double spacing = 0.0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        spacing += static_cast<double>(idx[j] - idx[j - 1]);
    }
    spacing /= static_cast<double>(idx.size() - 1);
    st.period_s = 2.0 * spacing * dt;  // extrema are half a period apart
    return st;
}

}  // namespace

PiGains tune_pi(const LoopProbe& probe, const ZieglerNicholsOptions& options) {
    const auto evaluate = [&](double gain) { return analyze_trace(probe(gain), options.probe_dt); };

    double stable_gain = 0.0;
    double unstable_gain = 0.0;
    OscillationStats unstable_stats;

    for (double gain = options.gain_min; gain <= options.gain_max; gain *= 2.0) {
        const OscillationStats st = evaluate(gain);
        if (st.growth >= 1.0) {
            unstable_gain = gain;
            unstable_stats = st;
            break;
        }
        stable_gain = gain;
    }
    if (unstable_gain == 0.0) {
        throw TuningError("tune_pi: no sustained oscillation below the gain sweep bound");
    }

    double k_u = unstable_gain;
    OscillationStats boundary = unstable_stats;
    if (stable_gain > 0.0) {
        double lo = stable_gain, hi = unstable_gain;
        for (int i = 0; i < options.bisection_iters; ++i) {
            const double mid = std::sqrt(lo * hi);
            const OscillationStats st = evaluate(mid);
            if (st.growth >= 1.0) {
                hi = mid;
                boundary = st;
            } else {
                lo = mid;
            }
        }
        k_u = hi;
    }
    if (!boundary.oscillating || !(boundary.period_s > 0.0) || !std::isfinite(boundary.period_s)) {
        // Fall back to the closest oscillating trace to estimate the period.
        const OscillationStats st = evaluate(k_u * 1.05);
        if (!st.oscillating || !(st.period_s > 0.0)) {
            throw TuningError("tune_pi: oscillation period could not be measured");
        }
        boundary = st;
    }

    PiGains gains;
    gains.ultimate_gain = k_u;
    gains.ultimate_period_s = boundary.period_s;
    gains.kp = 0.45 * k_u;
    gains.ki = 0.54 * k_u / boundary.period_s;
    return gains;
}

}  // namespace penstock
