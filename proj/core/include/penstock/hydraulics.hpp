#pragma once

#include <Eigen/Core>

#include "penstock/plant.hpp"

namespace penstock {

/// Equivalent-circuit parameters of the discretized penstock. All I
/// elements share the same R, L, C (uniform conduit).
struct CircuitModel {
    double resistance = 0.0;       ///< R at the reference flow, s/m^2
    double inductance = 0.0;       ///< L, s^2/m^2
    double capacitance = 0.0;      ///< C, m^2
    double friction_coeff = 0.0;   ///< r = lambda*dx/(2 g D A^2); R(Q) = r*|Q|
    double element_length_m = 0.0;
    double turbine_inductance = 0.0;
    int element_count = 0;
    PlantParameters params;
};

/// Hydraulic state [Q_1..Q_I, h_1..h_I, Q_t], dimension 2I+1.
struct StateVector {
    Eigen::VectorXd data;
    int element_count = 0;

    static StateVector zero(int element_count) {
        StateVector x;
        x.element_count = element_count;
        x.data = Eigen::VectorXd::Zero(2 * element_count + 1);
        return x;
    }

    int dim() const { return 2 * element_count + 1; }

    double flow(int i) const { return data[i]; }
    double& flow(int i) { return data[i]; }
    double head(int i) const { return data[element_count + i]; }
    double& head(int i) { return data[element_count + i]; }
    double turbine_flow() const { return data[2 * element_count]; }
    double& turbine_flow() { return data[2 * element_count]; }
};

/// Exogenous inputs of the hydraulic circuit.
struct HydraulicInputs {
    double vane = 1.0;           ///< guide-vane opening y, per unit in [0,1]
    double upstream_head_m = 0.0;
    double downstream_head_m = 0.0;
};

/// Vane openings below this are clamped in the turbine law to avoid the
/// singular fully-closed limit.
inline constexpr double kMinVaneOpening = 1e-4;

/// Builds circuit parameters from the plant data, evaluating the
/// hydroacoustic resistance at the reference flow q_ref.
CircuitModel build_circuit(const PlantParameters& params, double q_ref);

/// Quasi-static turbine head: valve-analogy law anchored at the nominal
/// point, H_t = H_nom * (Q_t / (y * Q_nom))^2. Openings below
/// kMinVaneOpening are clamped.
double turbine_head(double turbine_flow, double vane, const PlantParameters& params);

/// Partial derivative of turbine_head with respect to the turbine flow.
double turbine_head_dflow(double turbine_flow, double vane, const PlantParameters& params);

/// Partial derivative of turbine_head with respect to the vane opening.
double turbine_head_dvane(double turbine_flow, double vane, const PlantParameters& params);

/// Mechanical torque delivered by the turbine, eta*rho*g*Q*H / omega.
double turbine_torque(double turbine_flow, double turbine_head_m, double rotor_speed_rad_s,
                      const PlantParameters& params);

/// Right-hand side of the circuit ODE. The resistance is evaluated at the
/// instantaneous |Q_i| (bi-linear friction). Throws InstabilityError when
/// any head leaves [-2*H_u, 2*H_u] or the state is not finite.
StateVector derivative(const StateVector& x, const HydraulicInputs& u, const CircuitModel& circuit);

/// Classical explicit Runge-Kutta 4 advance of `derivative` by dt.
StateVector step_rk4(const StateVector& x, const HydraulicInputs& u, const CircuitModel& circuit,
                     double dt);

/// Algebraic steady state at a fixed vane opening: uniform flow through all
/// elements, heads decreasing by the friction drops. Solved by bisection on
/// the total flow in (0, 2*Q_nom]; relative tolerance 1e-10.
StateVector steady_state(const CircuitModel& circuit, double vane, double upstream_head_m,
                         double downstream_head_m);

}  // namespace penstock
