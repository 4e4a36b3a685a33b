#include "penstock/qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "penstock/errors.hpp"

namespace penstock {

namespace {

void fill_residuals(const QpProblem& pr, QpSolution& sol) {
    const Eigen::VectorXd slack = pr.g * sol.x - pr.h;
    sol.primal_residual = std::max(0.0, slack.maxCoeff());
    sol.stationarity_residual =
        (pr.p * sol.x + pr.q + pr.g.transpose() * sol.duals).cwiseAbs().maxCoeff();
    sol.complementarity_residual = sol.duals.cwiseProduct(slack).cwiseAbs().maxCoeff();
}

}  // namespace

QpSolution solve_qp(const QpProblem& pr, double tol, int max_iterations) {
    const int n = pr.variables();
    const int m = pr.constraints();
    if (pr.p.rows() != n || pr.p.cols() != n || pr.g.cols() != n || pr.g.rows() != m) {
        throw ParameterError("solve_qp: inconsistent problem dimensions");
    }
    if (max_iterations <= 0) max_iterations = 50 * (n + m);

    Eigen::LLT<Eigen::MatrixXd> llt(pr.p);
    if (llt.info() != Eigen::Success) {
        throw ParameterError("solve_qp: P is not positive definite");
    }

    QpSolution sol;
    sol.x = llt.solve(-pr.q);
    sol.duals = Eigen::VectorXd::Zero(m);
    if (m == 0) {
        sol.status = QpStatus::optimal;
        return sol;
    }

    std::vector<int> active;           // constraint row indices
    std::vector<double> multipliers;   // matching duals, kept >= 0
    active.reserve(static_cast<std::size_t>(n));

    const double feas_tol = tol * (1.0 + pr.h.cwiseAbs().maxCoeff());
    int iterations = 0;

    const auto finish = [&](QpStatus status) {
        for (std::size_t j = 0; j < active.size(); ++j) {
            sol.duals[active[j]] = multipliers[j];
        }
        sol.status = status;
        sol.iterations = iterations;
        fill_residuals(pr, sol);
        return sol;
    };

    while (true) {
        // Most violated inactive constraint.
        int worst = -1;
        double worst_violation = feas_tol;
        Eigen::VectorXd slack = pr.g * sol.x - pr.h;
        for (int i = 0; i < m; ++i) {
            if (std::find(active.begin(), active.end(), i) != active.end()) continue;
            if (slack[i] > worst_violation) {
                worst_violation = slack[i];
                worst = i;
            }
        }
        if (worst < 0) return finish(QpStatus::optimal);

        const Eigen::VectorXd g_p = pr.g.row(worst).transpose();
        double s_p = slack[worst];
        double lambda_p = 0.0;

        // Inner loop: drive constraint `worst` to its boundary, dropping
        // blocking active constraints on the way.
        while (true) {
            if (++iterations > max_iterations) return finish(QpStatus::max_iterations);

            const int k = static_cast<int>(active.size());
            Eigen::VectorXd r(k);
            Eigen::VectorXd z;
            const Eigen::VectorXd pinv_gp = llt.solve(g_p);
            if (k == 0) {
                z = pinv_gp;
            } else {
                Eigen::MatrixXd normals(n, k);
                for (int j = 0; j < k; ++j) normals.col(j) = pr.g.row(active[j]).transpose();
                const Eigen::MatrixXd pinv_n = llt.solve(normals);
                const Eigen::MatrixXd gram = normals.transpose() * pinv_n;
                r = gram.ldlt().solve(normals.transpose() * pinv_gp);
                z = pinv_gp - pinv_n * r;
            }

            // Dual step bound: first active multiplier to hit zero.
            double t1 = std::numeric_limits<double>::infinity();
            int blocking = -1;
            for (int j = 0; j < k; ++j) {
                if (r[j] > 1e-14) {
                    const double step = multipliers[j] / r[j];
                    if (step < t1) {
                        t1 = step;
                        blocking = j;
                    }
                }
            }

            const double curvature = g_p.dot(z);  // z'Pz >= 0
            const double z_scale = 1e-12 * (1.0 + pinv_gp.cwiseAbs().maxCoeff());
            if (z.cwiseAbs().maxCoeff() <= z_scale || curvature <= 0.0) {
                // No primal motion possible: constraint normal lies in the
                // span of the active set.
                if (blocking < 0) return finish(QpStatus::infeasible);
                for (int j = 0; j < k; ++j) multipliers[j] -= t1 * r[j];
                lambda_p += t1;
                active.erase(active.begin() + blocking);
                multipliers.erase(multipliers.begin() + blocking);
                continue;
            }

            const double t2 = s_p / curvature;
            const double t = std::min(t1, t2);

            sol.x -= t * z;
            for (int j = 0; j < k; ++j) multipliers[j] -= t * r[j];
            lambda_p += t;
            s_p -= t * curvature;

            if (t == t2) {
                active.push_back(worst);
                multipliers.push_back(lambda_p);
                break;
            }
            active.erase(active.begin() + blocking);
            multipliers.erase(multipliers.begin() + blocking);
        }
    }
}

}  // namespace penstock
