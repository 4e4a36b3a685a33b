#pragma once

#include <functional>
#include <vector>

#include "penstock/plant.hpp"

namespace penstock {

/// PI governor with permanent droop, rate limit and optional deadband.
struct GovernorConfig {
    double kp = 2.0;               ///< pu/pu
    double ki = 0.8;               ///< pu/(pu*s)
    double permanent_droop = 0.02;  ///< R_p, pu
    double vane_rate_limit = 0.1;   ///< pu/s
    double vane_min = 0.0;
    double vane_max = 1.0;
    double deadband_hz = 0.0;

    void validate() const;
};

struct GovernorState {
    double integrator = 0.0;
    double vane_setpoint = 0.0;  ///< last issued y*, also the droop feedback

    /// Initializes the governor at equilibrium for a given operating point.
    static GovernorState at_setpoint(double vane) {
        return GovernorState{vane, vane};
    }
};

/// One governor update. The measured frequency enters through the droop
/// (deadband applied first); the permanent droop feedback is the governor's
/// own gate command. Returns the new state; `vane_setpoint` is y*.
GovernorState governor_step(const GovernorState& state, double measured_frequency_hz,
                            double power_reference_pu, double dt, const GovernorConfig& config,
                            double nominal_frequency_hz);

/// Second-order synchronous generator on an infinite bus.
struct GeneratorParams {
    double inertia_kgm2 = 0.0;            ///< J
    double damping_nms_per_rad = 5e6;     ///< D, on the speed deviation
    double sync_torque_nm_per_rad = 0.0;  ///< K_s, electrical torque = K_s*sin(delta)
    int pole_pairs = 8;

    /// Sizes J from an inertia constant H (s) on the plant MVA base and K_s
    /// so the nominal torque occurs at a 30 degree power angle.
    static GeneratorParams from_plant(const PlantParameters& plant, double inertia_constant_s = 4.0);

    void validate() const;
};

struct GeneratorState {
    double rotor_angle_rad = 0.0;   ///< delta, relative to the grid phasor
    double rotor_speed_rad_s = 0.0;  ///< omega (mechanical-electrical, p*mech)
};

struct GeneratorOutput {
    GeneratorState state;
    double electrical_torque_nm = 0.0;
};

/// RK4 advance of the swing equation with mechanical torque and grid
/// frequency held over the step. Throws LossOfSynchronismError when
/// |delta| exceeds pi/2.
GeneratorOutput generator_step(const GeneratorState& gen, const GeneratorParams& params,
                               double mechanical_torque_nm, double grid_frequency_hz, double dt);

/// Result of the Ziegler-Nichols closed-loop probe.
struct PiGains {
    double kp = 0.0;
    double ki = 0.0;
    double ultimate_gain = 0.0;
    double ultimate_period_s = 0.0;
};

/// Closed-loop probe: maps a proportional gain to the error trace of the
/// loop (uniform sampling `probe_dt`).
using LoopProbe = std::function<std::vector<double>(double gain)>;

struct ZieglerNicholsOptions {
    double gain_min = 0.05;
    double gain_max = 512.0;
    double probe_dt = 1e-3;     ///< sample period of the probe traces
    int bisection_iters = 24;
};

/// Sweeps the proportional gain until the probe's oscillation switches from
/// decaying to growing, takes that as the ultimate gain K_u and the peak
/// spacing as T_u, and applies the classical PI rule kp = 0.45 K_u,
/// ki = 0.54 K_u / T_u. Throws TuningError when no oscillation boundary is
/// found inside the sweep bounds.
PiGains tune_pi(const LoopProbe& probe, const ZieglerNicholsOptions& options = {});

}  // namespace penstock
