#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "helpers/qp_enumeration.hpp"
#include "penstock/errors.hpp"
#include "penstock/qp.hpp"

using namespace penstock;
using penstock::testing::enumeration_oracle;
using penstock::testing::random_feasible_qp;

TEST_CASE("unconstrained minimum") {
    QpProblem pr;
    pr.p = Eigen::MatrixXd::Identity(1, 1) * 2.0;
    pr.q = Eigen::VectorXd::Constant(1, -4.0);  // min (x-2)^2
    pr.g.resize(0, 1);
    pr.h.resize(0);
    const QpSolution sol = solve_qp(pr);
    CHECK(sol.status == QpStatus::optimal);
    CHECK(sol.x(0) == doctest::Approx(2.0));
}

TEST_CASE("clamped one-variable problem") {
    QpProblem pr;
    pr.p = Eigen::MatrixXd::Identity(1, 1) * 2.0;
    pr.q = Eigen::VectorXd::Constant(1, -4.0);
    pr.g = Eigen::MatrixXd::Constant(1, 1, 1.0);  // x <= 1
    pr.h = Eigen::VectorXd::Constant(1, 1.0);
    const QpSolution sol = solve_qp(pr);
    CHECK(sol.status == QpStatus::optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0));
    CHECK(sol.duals(0) == doctest::Approx(2.0));  // gradient balance 2(x-2) + l = 0
    CHECK(sol.primal_residual <= 1e-9);
    CHECK(sol.stationarity_residual <= 1e-9);
    CHECK(sol.complementarity_residual <= 1e-9);
}

TEST_CASE("redundant and duplicate constraints") {
    QpProblem pr;
    pr.p = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    pr.q = Eigen::VectorXd::Zero(2);
    pr.q << -2.0, -2.0;  // min (x-1)^2 + (y-1)^2
    pr.g.resize(3, 2);
    pr.g << 1.0, 0.0, 1.0, 0.0, 1.0, 1.0;  // x <= 0.5 twice, x + y <= 1
    pr.h.resize(3);
    pr.h << 0.5, 0.5, 1.0;
    const QpSolution sol = solve_qp(pr);
    CHECK(sol.status == QpStatus::optimal);
    CHECK(sol.x(0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(sol.x(1) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("infeasible constraints are reported") {
    QpProblem pr;
    pr.p = 2.0 * Eigen::MatrixXd::Identity(1, 1);
    pr.q = Eigen::VectorXd::Zero(1);
    pr.g.resize(2, 1);
    pr.g << 1.0, -1.0;  // x <= -1 and -x <= -2 (x >= 2)
    pr.h.resize(2);
    pr.h << -1.0, -2.0;
    const QpSolution sol = solve_qp(pr);
    CHECK(sol.status == QpStatus::infeasible);
}

TEST_CASE("dimension checks") {
    QpProblem pr;
    pr.p = Eigen::MatrixXd::Identity(2, 2);
    pr.q = Eigen::VectorXd::Zero(3);
    pr.g.resize(0, 2);
    pr.h.resize(0);
    CHECK_THROWS_AS(solve_qp(pr), ParameterError);

    QpProblem notspd;
    notspd.p = -Eigen::MatrixXd::Identity(2, 2);
    notspd.q = Eigen::VectorXd::Zero(2);
    notspd.g.resize(0, 2);
    notspd.h.resize(0);
    CHECK_THROWS_AS(solve_qp(notspd), ParameterError);
}

TEST_CASE("random problems match the enumeration oracle") {
    std::mt19937_64 rng(424242);
    std::uniform_int_distribution<int> n_dist(1, 8);
    std::uniform_int_distribution<int> m_dist(1, 16);

    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = n_dist(rng);
        const int m = m_dist(rng);
        const QpProblem pr = random_feasible_qp(rng, n, m);

        const QpSolution sol = solve_qp(pr, 1e-10);
        REQUIRE(sol.status == QpStatus::optimal);
        CHECK(sol.primal_residual <= 1e-8);
        CHECK(sol.stationarity_residual <= 1e-7 * (1.0 + pr.q.cwiseAbs().maxCoeff()));
        CHECK(sol.complementarity_residual <= 1e-7);

        const auto oracle = enumeration_oracle(pr);
        REQUIRE(oracle.has_value());
        CHECK((sol.x - *oracle).cwiseAbs().maxCoeff() <= 1e-6);
        ++checked;
    }
    CHECK(checked == 60);
}

TEST_CASE("deterministic solves") {
    std::mt19937_64 rng(7);
    const QpProblem pr = random_feasible_qp(rng, 6, 12);
    const QpSolution a = solve_qp(pr);
    const QpSolution b = solve_qp(pr);
    CHECK(a.x == b.x);
    CHECK(a.iterations == b.iterations);
}
