#pragma once

#include <Eigen/Core>

#include "penstock/hydraulics.hpp"

namespace penstock {

/// Continuous-time linear state-space around an operating point:
///   dx/dt = A x + B_y y + B_z [H_u; mu - H_d]
/// The hydroacoustic resistance is frozen at the operating-point flows and
/// the turbine law is replaced by its first-order Taylor expansion; the
/// constant Taylor terms are folded into mu.
struct ContinuousStateSpace {
    Eigen::MatrixXd a;
    Eigen::VectorXd b_vane;
    Eigen::MatrixXd b_exogenous;  ///< (2I+1) x 2
    double mu_m = 0.0;
    StateVector operating_state;
    double operating_vane = 1.0;
    int element_count = 0;

    /// Exogenous input vector [H_u; mu - H_d].
    Eigen::Vector2d exogenous_input(double upstream_head_m, double downstream_head_m) const {
        return {upstream_head_m, mu_m - downstream_head_m};
    }
};

/// Discrete-time counterpart at the control sampling step.
struct DiscreteStateSpace {
    Eigen::MatrixXd a;
    Eigen::VectorXd b_vane;
    Eigen::MatrixXd b_exogenous;
    double mu_m = 0.0;
    double dt_s = 0.0;
    int element_count = 0;
    int substeps = 1;

    /// Row selector extracting head h_i (0-based element index).
    int head_index(int element) const { return element_count + element; }

    Eigen::Vector2d exogenous_input(double upstream_head_m, double downstream_head_m) const {
        return {upstream_head_m, mu_m - downstream_head_m};
    }
};

/// Linearizes the circuit around (state, vane). The state does not need to
/// be an exact fixed point; resistances freeze at its flows and the turbine
/// partials evaluate at its turbine flow. Throws ModelError when the
/// resulting system matrix is not asymptotically stable.
ContinuousStateSpace linearize(const CircuitModel& circuit, const StateVector& state, double vane);

/// Discretizes by stepping the linear system with classical RK4 (the 4-term
/// truncated matrix exponential) over `substeps` internal steps composed to
/// dt. substeps <= 0 selects the smallest stable power of two
/// automatically. Throws ModelError when the spectral radius reaches 1.
DiscreteStateSpace discretize(const ContinuousStateSpace& ss, double dt, int substeps = 0,
                              bool check_stability = true);

/// Number of internal RK4 substeps the automatic rule would pick.
int stable_substep_count(const Eigen::MatrixXd& a, double dt);

/// Smallest horizon T (in steps, >= 1) after which the vane impulse
/// response on every head stays below decay_threshold times its peak.
/// Scans at most `cap` steps and returns `cap` when the response has not
/// decayed by then.
int settle_horizon(const DiscreteStateSpace& dss, double decay_threshold, int cap = 600);

}  // namespace penstock
