#include "penstock/mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "penstock/errors.hpp"

namespace penstock {

HeadBounds head_bounds(const SNCurve& sn, const PlantParameters& params, double nominal_head_m) {
    sn.validate();
    const double half_band = sn.fatigue_limit_pa * params.wall_thickness_m /
                             (params.head_to_pressure_pa_per_m() * params.penstock_diameter_m);
    if (!(half_band > 0.0) || !std::isfinite(half_band)) {
        throw ParameterError("head_bounds: non-positive stress band");
    }
    HeadBounds b;
    b.nominal_m = nominal_head_m;
    b.lower_m = nominal_head_m - half_band;
    b.upper_m = nominal_head_m + half_band;
    return b;
}

void MpcConfig::validate() const {
    if (horizon_steps < 0) throw ParameterError("mpc: horizon_steps must be >= 0");
    if (!(dt_s > 0.0)) throw ParameterError("mpc: dt_s must be positive");
    if (!(slack_weight > 0.0)) throw ParameterError("mpc: slack_weight must be positive");
    if (!(solver_tol > 0.0)) throw ParameterError("mpc: solver_tol must be positive");
    if (!(vane_min < vane_max)) throw ParameterError("mpc: vane_min must be < vane_max");
}

MpcProblem build_qp(const DiscreteStateSpace& dss, const StateVector& measured_state,
                    const Eigen::VectorXd& setpoint_forecast, const HeadBounds& bounds,
                    const MpcConfig& config, double upstream_head_m, double downstream_head_m) {
    config.validate();
    const int horizon = config.horizon_steps;
    const int n_el = dss.element_count;
    if (setpoint_forecast.size() != horizon + 1) {
        throw ParameterError("build_qp: forecast length must be horizon_steps + 1");
    }
    if (measured_state.dim() != dss.a.rows()) {
        throw ParameterError("build_qp: state dimension mismatch");
    }
    if (!(bounds.lower_m < bounds.upper_m)) {
        throw ParameterError("build_qp: empty head band");
    }

    const int n_vane = horizon + 1;
    const int n_slack = horizon;
    const int n_var = n_vane + n_slack;

    MpcProblem mp;
    mp.horizon_steps = horizon;
    mp.element_count = n_el;
    mp.bounds = bounds;
    mp.forecast = setpoint_forecast;

    // Objective: sum (y_k - y*_k)^2 + rho * sum s_k^2.
    mp.qp.p = Eigen::MatrixXd::Zero(n_var, n_var);
    mp.qp.q = Eigen::VectorXd::Zero(n_var);
    for (int k = 0; k < n_vane; ++k) {
        mp.qp.p(k, k) = 2.0;
        mp.qp.q(k) = -2.0 * setpoint_forecast[k];
    }
    for (int k = 0; k < n_slack; ++k) {
        mp.qp.p(n_vane + k, n_vane + k) = 2.0 * config.slack_weight;
    }

    // Free head response (y == 0) and vane impulse responses.
    const Eigen::Vector2d z = dss.exogenous_input(upstream_head_m, downstream_head_m);
    mp.free_heads.resize(n_el, std::max(horizon, 0));
    mp.vane_impulse.resize(n_el, std::max(horizon, 0));
    Eigen::VectorXd free_state = measured_state.data;
    Eigen::VectorXd impulse = dss.b_vane;
    for (int k = 0; k < horizon; ++k) {
        free_state = dss.a * free_state + dss.b_exogenous * z;
        mp.free_heads.col(k) = free_state.segment(n_el, n_el);
        if (k > 0) impulse = dss.a * impulse;  // reuse across columns
        mp.vane_impulse.col(k) = impulse.segment(n_el, n_el);
    }

    const int n_rows = 2 * n_vane + n_slack + 2 * n_el * horizon;
    mp.qp.g = Eigen::MatrixXd::Zero(n_rows, n_var);
    mp.qp.h = Eigen::VectorXd::Zero(n_rows);

    int row = 0;
    for (int k = 0; k < n_vane; ++k) {
        mp.qp.g(row, k) = 1.0;
        mp.qp.h(row) = config.vane_max;
        ++row;
        mp.qp.g(row, k) = -1.0;
        mp.qp.h(row) = -config.vane_min;
        ++row;
    }
    for (int k = 0; k < n_slack; ++k) {
        mp.qp.g(row, n_vane + k) = -1.0;
        mp.qp.h(row) = 0.0;
        ++row;
    }

    // Head band at prediction steps 1..T:
    //   h_hat(t+k) = free_k + sum_j impulse(k-1-j) y_j, j = 0..k-1.
    for (int k = 1; k <= horizon; ++k) {
        const int slack_col = n_vane + (k - 1);
        for (int i = 0; i < n_el; ++i) {
            const double free_head = mp.free_heads(i, k - 1);
            // Upper: h_hat - s <= upper.
            for (int j = 0; j < k; ++j) {
                mp.qp.g(row, j) = mp.vane_impulse(i, k - 1 - j);
            }
            mp.qp.g(row, slack_col) = -1.0;
            mp.qp.h(row) = bounds.upper_m - free_head;
            ++row;
            // Lower: -h_hat - s <= -lower.
            for (int j = 0; j < k; ++j) {
                mp.qp.g(row, j) = -mp.vane_impulse(i, k - 1 - j);
            }
            mp.qp.g(row, slack_col) = -1.0;
            mp.qp.h(row) = free_head - bounds.lower_m;
            ++row;
        }
    }
    return mp;
}

MpcSolution solve_mpc(const MpcProblem& problem, const MpcConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const QpSolution qp = solve_qp(problem.qp, config.solver_tol, config.max_iterations);
    const auto t1 = std::chrono::steady_clock::now();

    const int horizon = problem.horizon_steps;
    const int n_vane = horizon + 1;
    const int n_el = problem.element_count;

    MpcSolution sol;
    sol.vane_sequence = qp.x.head(n_vane);
    sol.first_vane = std::clamp(sol.vane_sequence[0], config.vane_min, config.vane_max);
    sol.slacks = horizon > 0 ? qp.x.tail(horizon).eval() : Eigen::VectorXd();
    sol.status = qp.status;
    sol.degraded = qp.status != QpStatus::optimal;
    sol.iterations = qp.iterations;
    sol.solve_time_s = std::chrono::duration<double>(t1 - t0).count();
    sol.max_slack_m = horizon > 0 ? std::max(0.0, sol.slacks.maxCoeff()) : 0.0;

    sol.predicted_heads.resize(n_el, std::max(horizon, 0));
    double worst = 0.0;
    int active = 0;
    for (int k = 1; k <= horizon; ++k) {
        Eigen::VectorXd heads = problem.free_heads.col(k - 1);
        for (int j = 0; j < k; ++j) {
            heads += problem.vane_impulse.col(k - 1 - j) * sol.vane_sequence[j];
        }
        sol.predicted_heads.col(k - 1) = heads;
        const double s = sol.slacks[k - 1];
        for (int i = 0; i < n_el; ++i) {
            const double over = heads[i] - (problem.bounds.upper_m + s);
            const double under = (problem.bounds.lower_m - s) - heads[i];
            worst = std::max({worst, over, under});
            if (std::abs(heads[i] - problem.bounds.upper_m) < 1e-9 ||
                std::abs(heads[i] - problem.bounds.lower_m) < 1e-9) {
                ++active;
            }
        }
    }
    sol.max_band_violation_m = worst;
    sol.active_head_constraints = active;
    return sol;
}

MpcController::MpcController(CircuitModel circuit, MpcConfig config, HeadBounds bounds)
    : circuit_(std::move(circuit)), config_(config), bounds_(bounds) {
    config_.validate();
}

MpcSolution MpcController::step(const StateVector& measured_state, double setpoint,
                                double linearization_vane, double upstream_head_m,
                                double downstream_head_m) {
    const double vane0 = std::clamp(linearization_vane, 1e-3, 1.0);
    const ContinuousStateSpace ss = linearize(circuit_, measured_state, vane0);
    model_ = discretize(ss, config_.dt_s);

    // Persistence forecast: future set-points equal the current one.
    const Eigen::VectorXd forecast =
        Eigen::VectorXd::Constant(config_.horizon_steps + 1, setpoint);
    const MpcProblem problem = build_qp(model_, measured_state, forecast, bounds_, config_,
                                        upstream_head_m, downstream_head_m);
    return solve_mpc(problem, config_);
}

}  // namespace penstock
