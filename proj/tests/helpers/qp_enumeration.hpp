#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "penstock/qp.hpp"

namespace penstock::testing {

/// Exhaustive active-set enumeration: for every subset of constraints
/// (smallest first) solve the equality-constrained KKT system and return
/// the first point satisfying primal feasibility and dual nonnegativity.
/// Valid for strictly convex problems, where any KKT point is the optimum.
inline std::optional<Eigen::VectorXd> enumeration_oracle(const QpProblem& pr, double tol = 1e-8) {
    const int n = pr.variables();
    const int m = pr.constraints();

    std::vector<int> subset;
    const std::function<std::optional<Eigen::VectorXd>(int, int)> search =
        [&](int start, int remaining) -> std::optional<Eigen::VectorXd> {
        if (remaining == 0) {
            const int k = static_cast<int>(subset.size());
            Eigen::MatrixXd kkt(n + k, n + k);
            kkt.setZero();
            kkt.topLeftCorner(n, n) = pr.p;
            Eigen::VectorXd rhs(n + k);
            rhs.head(n) = -pr.q;
            for (int j = 0; j < k; ++j) {
                kkt.block(n + j, 0, 1, n) = pr.g.row(subset[static_cast<std::size_t>(j)]);
                kkt.block(0, n + j, n, 1) =
                    pr.g.row(subset[static_cast<std::size_t>(j)]).transpose();
                rhs(n + j) = pr.h(subset[static_cast<std::size_t>(j)]);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
            if (!lu.isInvertible()) return std::nullopt;
            const Eigen::VectorXd sol = lu.solve(rhs);
            const Eigen::VectorXd x = sol.head(n);
            const Eigen::VectorXd lambda = sol.tail(k);
            if (k > 0 && lambda.minCoeff() < -tol) return std::nullopt;
            const Eigen::VectorXd slack = pr.g * x - pr.h;
            if (slack.maxCoeff() > tol) return std::nullopt;
            return x;
        }
        for (int i = start; i <= m - remaining; ++i) {
            subset.push_back(i);
            if (auto r = search(i + 1, remaining - 1)) return r;
            subset.pop_back();
        }
        return std::nullopt;
    };

    for (int k = 0; k <= std::min(n, m); ++k) {
        subset.clear();
        if (auto r = search(0, k)) return r;
    }
    return std::nullopt;
}

/// Random strictly convex QP with a guaranteed interior feasible point.
inline QpProblem random_feasible_qp(std::mt19937_64& rng, int n, int m) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    QpProblem pr;
    Eigen::MatrixXd m_raw(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m_raw(i, j) = gauss(rng);
    pr.p = m_raw.transpose() * m_raw + (0.1 + uniform(rng)) * Eigen::MatrixXd::Identity(n, n);
    pr.q.resize(n);
    for (int i = 0; i < n; ++i) pr.q(i) = 2.0 * gauss(rng);

    Eigen::VectorXd feasible(n);
    for (int i = 0; i < n; ++i) feasible(i) = gauss(rng);

    pr.g.resize(m, n);
    pr.h.resize(m);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) pr.g(i, j) = gauss(rng);
        pr.h(i) = pr.g.row(i).dot(feasible) + 0.8 * uniform(rng);
    }
    return pr;
}

}  // namespace penstock::testing
