#include "penstock/linear_model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "penstock/errors.hpp"

namespace penstock {

ContinuousStateSpace linearize(const CircuitModel& circuit, const StateVector& state, double vane) {
    if (!(vane > 0.0 && vane <= 1.0)) {
        throw ParameterError("linearize: vane opening must be in (0, 1]");
    }
    if (!state.data.allFinite()) throw ParameterError("linearize: state must be finite");

    const int n_el = circuit.element_count;
    const int dim = 2 * n_el + 1;
    const double inv_l = 1.0 / circuit.inductance;
    const double inv_c = 1.0 / circuit.capacitance;
    const double inv_lt = 1.0 / circuit.turbine_inductance;
    const PlantParameters& p = circuit.params;

    ContinuousStateSpace ss;
    ss.element_count = n_el;
    ss.operating_state = state;
    ss.operating_vane = vane;
    ss.a = Eigen::MatrixXd::Zero(dim, dim);
    ss.b_vane = Eigen::VectorXd::Zero(dim);
    ss.b_exogenous = Eigen::MatrixXd::Zero(dim, 2);

    // Flow rows: L dQ_i/dt = h_{i-1} - h_i - R_i Q_i, with the resistance
    // frozen at the operating-point flow magnitude.
    for (int i = 0; i < n_el; ++i) {
        const double r_frozen = circuit.friction_coeff * std::abs(state.flow(i));
        ss.a(i, i) = -r_frozen * inv_l;
        ss.a(i, n_el + i) = -inv_l;
        if (i == 0) {
            ss.b_exogenous(0, 0) = inv_l;  // upstream reservoir head
        } else {
            ss.a(i, n_el + i - 1) = inv_l;
        }
    }

    // Head rows: C dh_i/dt = Q_i - Q_{i+1} (Q_{I+1} is the turbine flow).
    for (int i = 0; i < n_el; ++i) {
        ss.a(n_el + i, i) = inv_c;
        const int outflow_col = (i + 1 < n_el) ? (i + 1) : (2 * n_el);
        ss.a(n_el + i, outflow_col) = -inv_c;
    }

    // Turbine row: L_t dQ_t/dt = h_I - H_d - H_t, with the turbine head
    // expanded to first order. The constant Taylor terms fold into mu.
    const double q_t = state.turbine_flow();
    const double dh_dq = turbine_head_dflow(q_t, vane, p);
    const double dh_dy = turbine_head_dvane(q_t, vane, p);
    const double h_t0 = turbine_head(q_t, vane, p);
    ss.mu_m = dh_dq * q_t + dh_dy * vane - h_t0;

    const int t_row = 2 * n_el;
    ss.a(t_row, n_el + n_el - 1) = inv_lt;
    ss.a(t_row, t_row) = -dh_dq * inv_lt;
    ss.b_vane(t_row) = -dh_dy * inv_lt;
    ss.b_exogenous(t_row, 1) = inv_lt;  // mu - H_d

    const Eigen::VectorXcd eig = ss.a.eigenvalues();
    const double max_real = eig.real().maxCoeff();
    if (max_real > 1e-9) {
        throw ModelError("linearize: system matrix unstable, max Re(lambda) = " +
                         std::to_string(max_real));
    }
    return ss;
}

int stable_substep_count(const Eigen::MatrixXd& a, double dt) {
    // Conservative bound on the eigenvalue magnitudes via the infinity norm;
    // keeps ||A|| * dt/n within the RK4 stability region with margin.
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    const int needed = std::max(1, static_cast<int>(std::ceil(norm * dt / 1.0)));
    int n = 1;
    while (n < needed) n *= 2;
    return n;
}

DiscreteStateSpace discretize(const ContinuousStateSpace& ss, double dt, int substeps,
                              bool check_stability) {
    if (!(dt > 0.0)) throw ParameterError("discretize: dt must be positive");
    const int dim = static_cast<int>(ss.a.rows());
    if (substeps <= 0) substeps = stable_substep_count(ss.a, dt);

    const double h = dt / static_cast<double>(substeps);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd ah = ss.a * h;
    const Eigen::MatrixXd ah2 = ah * ah;

    // One RK4 substep: x+ = Phi x + Gamma [B_y B_z] u with inputs held.
    const Eigen::MatrixXd phi =
        identity + ah + ah2 / 2.0 + (ah2 * ah) / 6.0 + (ah2 * ah2) / 24.0;
    const Eigen::MatrixXd gamma_op =
        h * (identity + ah / 2.0 + ah2 / 6.0 + (ah2 * ah) / 24.0);

    Eigen::MatrixXd b_all(dim, 3);
    b_all.col(0) = ss.b_vane;
    b_all.rightCols(2) = ss.b_exogenous;

    // Compose the substeps by binary exponentiation of the affine step
    // (A, B): applying (A2, B2) after (A1, B1) gives (A2 A1, A2 B1 + B2).
    Eigen::MatrixXd a_total = Eigen::MatrixXd::Identity(dim, dim);
    Eigen::MatrixXd b_total = Eigen::MatrixXd::Zero(dim, 3);
    Eigen::MatrixXd a_pow = phi;
    Eigen::MatrixXd b_pow = gamma_op * b_all;
    for (int n = substeps; n > 0; n >>= 1) {
        if (n & 1) {
            b_total = a_pow * b_total + b_pow;
            a_total = a_pow * a_total;
        }
        if (n > 1) {
            b_pow = a_pow * b_pow + b_pow;
            a_pow = a_pow * a_pow;
        }
    }

    DiscreteStateSpace dss;
    dss.a = std::move(a_total);
    dss.b_vane = b_total.col(0);
    dss.b_exogenous = b_total.rightCols(2);
    dss.mu_m = ss.mu_m;
    dss.dt_s = dt;
    dss.element_count = ss.element_count;
    dss.substeps = substeps;

    if (check_stability) {
        const double rho = dss.a.eigenvalues().cwiseAbs().maxCoeff();
        if (rho >= 1.0) {
            throw ModelError("discretize: spectral radius " + std::to_string(rho) + " >= 1");
        }
    }
    return dss;
}

int settle_horizon(const DiscreteStateSpace& dss, double decay_threshold, int cap) {
    if (!(decay_threshold > 0.0)) {
        throw ParameterError("settle_horizon: decay_threshold must be positive");
    }
    const int n_el = dss.element_count;
    const int first_head = n_el;

    // Impulse response of all heads to the vane input: M(k) = max_i |C_i A^k B_y|.
    std::vector<double> response;
    response.reserve(static_cast<std::size_t>(cap) + 1);
    Eigen::VectorXd v = dss.b_vane;
    for (int k = 0; k <= cap; ++k) {
        response.push_back(v.segment(first_head, n_el).cwiseAbs().maxCoeff());
        if (k < cap) v = dss.a * v;
    }
    const double peak = *std::max_element(response.begin(), response.end());
    if (!(peak > 0.0)) return 1;

    // Smallest T >= 1 with the response at or below threshold*peak from T on.
    int t = cap;
    double tail_max = 0.0;
    for (int k = cap; k >= 1; --k) {
        tail_max = std::max(tail_max, response[static_cast<std::size_t>(k)]);
        if (tail_max <= decay_threshold * peak) t = k;
        else break;
    }
    return t;
}

}  // namespace penstock
