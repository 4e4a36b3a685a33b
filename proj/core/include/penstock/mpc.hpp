#pragma once

#include <Eigen/Core>
#include <vector>

#include "penstock/fatigue.hpp"
#include "penstock/linear_model.hpp"
#include "penstock/qp.hpp"

namespace penstock {

/// Head interval equivalent to the +-fatigue_limit/2 stress band around the
/// nominal operating stress.
struct HeadBounds {
    double lower_m = 0.0;
    double upper_m = 0.0;
    double nominal_m = 0.0;

    double half_band_m() const { return 0.5 * (upper_m - lower_m); }
};

/// Converts the fatigue limit into head bounds around h_nom:
/// h_nom -+ fatigue_limit * e / (k D). Any head trajectory inside the band
/// has stress ranges at or below the fatigue limit on every element.
HeadBounds head_bounds(const SNCurve& sn, const PlantParameters& params, double nominal_head_m);

struct MpcConfig {
    int horizon_steps = 20;      ///< T
    double dt_s = 0.1;           ///< internal model sampling step
    double slack_weight = 1e4;   ///< quadratic penalty on the band slack
    double solver_tol = 1e-9;
    int max_iterations = 0;      ///< 0: solver default
    double vane_min = 0.0;
    double vane_max = 1.0;

    void validate() const;
};

/// Condensed finite-horizon program: decision vector
/// [y(t)..y(t+T), s(1)..s(T)] with one shared slack per prediction step.
struct MpcProblem {
    QpProblem qp;
    int horizon_steps = 0;
    int element_count = 0;
    HeadBounds bounds;
    Eigen::VectorXd forecast;         ///< y*(t..t+T)
    Eigen::MatrixXd free_heads;       ///< I x T, response with y == 0
    Eigen::MatrixXd vane_impulse;     ///< I x T, column m = C_h A^m B_y
};

struct MpcSolution {
    Eigen::VectorXd vane_sequence;  ///< y(t..t+T)
    double first_vane = 0.0;        ///< actuated element
    Eigen::VectorXd slacks;         ///< per prediction step, meters
    Eigen::MatrixXd predicted_heads;  ///< I x T under the returned sequence
    QpStatus status = QpStatus::optimal;
    bool degraded = false;
    int iterations = 0;
    double solve_time_s = 0.0;
    double max_slack_m = 0.0;
    /// Worst predicted band violation beyond the slack variables (meters);
    /// bounded by the solver tolerance for a certified solution.
    double max_band_violation_m = 0.0;
    int active_head_constraints = 0;
};

/// Builds the condensed QP from the discrete model, the measured state, the
/// set-point forecast (length T+1) and the head bounds.
MpcProblem build_qp(const DiscreteStateSpace& dss, const StateVector& measured_state,
                    const Eigen::VectorXd& setpoint_forecast, const HeadBounds& bounds,
                    const MpcConfig& config, double upstream_head_m, double downstream_head_m);

/// Solves the program and decodes the solution.
MpcSolution solve_mpc(const MpcProblem& problem, const MpcConfig& config);

/// Receding-horizon controller: relinearizes at every step, builds the QP
/// with a persistence forecast of y*, and actuates the first element.
class MpcController {
public:
    MpcController(CircuitModel circuit, MpcConfig config, HeadBounds bounds);

    /// One receding-horizon update from the measured plant state.
    MpcSolution step(const StateVector& measured_state, double setpoint,
                     double linearization_vane, double upstream_head_m, double downstream_head_m);

    const HeadBounds& bounds() const { return bounds_; }
    const MpcConfig& config() const { return config_; }
    const DiscreteStateSpace& last_model() const { return model_; }

private:
    CircuitModel circuit_;
    MpcConfig config_;
    HeadBounds bounds_;
    DiscreteStateSpace model_;
};

}  // namespace penstock
