#pragma once

#include <Eigen/Core>

namespace penstock {

/// Strictly convex quadratic program
///   min 1/2 x'P x + q'x   s.t.  G x <= h
/// with P symmetric positive definite.
struct QpProblem {
    Eigen::MatrixXd p;
    Eigen::VectorXd q;
    Eigen::MatrixXd g;
    Eigen::VectorXd h;

    int variables() const { return static_cast<int>(q.size()); }
    int constraints() const { return static_cast<int>(h.size()); }
};

enum class QpStatus {
    optimal,
    max_iterations,  ///< best iterate returned, KKT not certified
    infeasible,
};

struct QpSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd duals;  ///< one multiplier per constraint row, >= 0
    QpStatus status = QpStatus::optimal;
    int iterations = 0;
    double primal_residual = 0.0;           ///< max(0, Gx - h)
    double stationarity_residual = 0.0;     ///< ||Px + q + G'dual||_inf
    double complementarity_residual = 0.0;  ///< max |dual_i * (Gx - h)_i|
};

/// Dual active-set method (Goldfarb-Idnani): starts from the unconstrained
/// optimum and adds violated constraints until the KKT conditions hold.
/// Deterministic: ties in the violation selection break on the lowest row
/// index. max_iterations <= 0 picks 50*(n+m).
QpSolution solve_qp(const QpProblem& problem, double tol = 1e-9, int max_iterations = 0);

}  // namespace penstock
