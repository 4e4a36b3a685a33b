#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "penstock/errors.hpp"
#include "penstock/fatigue.hpp"

using namespace penstock;

namespace {

/// Independent brute-force oracle: four-point rainflow. Repeatedly removes
/// any inner range bounded by its neighbours as one full cycle, then counts
/// the residue as half cycles. Distinct from the streaming three-point
/// implementation under test.
CycleSet rainflow_four_point_oracle(std::vector<double> series) {
    std::vector<double> tp = turning_points(series);
    CycleSet cycles;
    bool removed = true;
    while (removed) {
        removed = false;
        for (std::size_t i = 0; i + 3 < tp.size(); ++i) {
            const double outer_l = std::abs(tp[i + 1] - tp[i]);
            const double inner = std::abs(tp[i + 2] - tp[i + 1]);
            const double outer_r = std::abs(tp[i + 3] - tp[i + 2]);
            if (inner <= outer_l && inner <= outer_r) {
                if (inner > 0.0) cycles.push_back({inner, 1.0});
                tp.erase(tp.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                         tp.begin() + static_cast<std::ptrdiff_t>(i) + 3);
                removed = true;
                break;
            }
        }
    }
    for (std::size_t i = 0; i + 1 < tp.size(); ++i) {
        const double range = std::abs(tp[i + 1] - tp[i]);
        if (range > 0.0) cycles.push_back({range, 0.5});
    }
    return cycles;
}

std::vector<std::pair<double, double>> sorted_cycles(const CycleSet& set) {
    std::vector<std::pair<double, double>> v;
    for (const Cycle& c : set) v.emplace_back(c.range, c.count);
    std::sort(v.begin(), v.end());
    return v;
}

bool cycle_sets_match(const CycleSet& a, const CycleSet& b, double tol = 1e-12) {
    const auto va = sorted_cycles(a);
    const auto vb = sorted_cycles(b);
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (std::abs(va[i].first - vb[i].first) > tol) return false;
        if (va[i].second != vb[i].second) return false;
    }
    return true;
}

double total_count(const CycleSet& set) {
    double n = 0.0;
    for (const Cycle& c : set) n += c.count;
    return n;
}

/// Range -> equivalent cycle count. On series with exactly tied ranges the
/// three- and four-point methods package fulls/halves differently while
/// agreeing on the aggregate.
std::vector<std::pair<double, double>> aggregate(const CycleSet& set) {
    auto v = sorted_cycles(set);
    std::vector<std::pair<double, double>> out;
    for (const auto& [range, count] : v) {
        if (!out.empty() && std::abs(out.back().first - range) <= 1e-12) {
            out.back().second += count;
        } else {
            out.emplace_back(range, count);
        }
    }
    return out;
}

bool aggregates_match(const CycleSet& a, const CycleSet& b) {
    const auto va = aggregate(a);
    const auto vb = aggregate(b);
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (std::abs(va[i].first - vb[i].first) > 1e-12) return false;
        if (std::abs(va[i].second - vb[i].second) > 1e-12) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("head to stress conversion") {
    PlantParameters p;
    p = p.materialized();
    // 315 m of head, zero elevation: (315 * 9810 * 5) / (2 * 0.05) Pa.
    CHECK(stress_from_head(315.0, 0.0, p) == doctest::Approx(154.5e6).epsilon(1e-4));
    CHECK(stress_from_head(100.0, 100.0, p) == 0.0);

    PlantParameters thick = p;
    thick.wall_thickness_m = 2.0 * p.wall_thickness_m;
    CHECK(stress_from_head(315.0, 0.0, thick) ==
          doctest::Approx(0.5 * stress_from_head(315.0, 0.0, p)));

    const std::vector<double> heads{315.0, 100.0};
    const std::vector<double> sigma = head_to_stress(heads, 0.0, p);
    CHECK(sigma.size() == 2);
    CHECK(sigma[0] == doctest::Approx(stress_from_head(315.0, 0.0, p)));
}

TEST_CASE("rainflow reproduces the canonical worked example") {
    const std::vector<double> series{-2.0, 1.0, -3.0, 5.0, -1.0, 3.0, -4.0, 4.0, -2.0};
    const CycleSet cycles = rainflow(series);

    CycleSet expected{{4.0, 1.0}, {3.0, 0.5}, {4.0, 0.5}, {8.0, 0.5},
                      {9.0, 0.5}, {8.0, 0.5}, {6.0, 0.5}};
    CHECK(cycle_sets_match(cycles, expected));
    CHECK(cycle_sets_match(cycles, rainflow_four_point_oracle(series)));
}

TEST_CASE("rainflow edge cases") {
    CHECK(rainflow(std::vector<double>{}).empty());
    CHECK(rainflow(std::vector<double>{3.0}).empty());
    CHECK(rainflow(std::vector<double>{2.0, 2.0, 2.0}).empty());

    // Monotone ramp: one half cycle spanning the full range.
    const CycleSet ramp = rainflow(std::vector<double>{0.0, 1.0, 2.5, 7.0});
    REQUIRE(ramp.size() == 1);
    CHECK(ramp[0].range == doctest::Approx(7.0));
    CHECK(ramp[0].count == 0.5);
}

TEST_CASE("rainflow on a pure sine") {
    const int periods = 5;
    const double amplitude = 2.5;
    std::vector<double> series;
    for (int k = 0; k <= periods * 200; ++k) {
        series.push_back(amplitude * std::sin(2.0 * M_PI * k / 200.0));
    }
    const CycleSet cycles = rainflow(series);
    CHECK(aggregates_match(cycles, rainflow_four_point_oracle(series)));

    // n - 1/2 equivalent cycles at range 2A plus two boundary half cycles.
    double count_2a = 0.0, count_a = 0.0;
    for (const Cycle& c : cycles) {
        if (std::abs(c.range - 2.0 * amplitude) < 1e-6) count_2a += c.count;
        else if (std::abs(c.range - amplitude) < 1e-6) count_a += c.count;
    }
    CHECK(count_2a == doctest::Approx(periods - 0.5));
    CHECK(count_a == doctest::Approx(1.0));
}

TEST_CASE("rainflow equals the four-point oracle on random walks") {
    std::mt19937_64 rng(7071);
    std::uniform_real_distribution<double> step(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> series{0.0};
        for (int k = 0; k < 120; ++k) series.push_back(series.back() + step(rng));
        CHECK(cycle_sets_match(rainflow(series), rainflow_four_point_oracle(series)));
    }
}

TEST_CASE("rainflow bookkeeping and scale equivariance") {
    std::mt19937_64 rng(2025);
    std::uniform_real_distribution<double> step(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> series{0.0};
        for (int k = 0; k < 200; ++k) series.push_back(series.back() + step(rng));

        // Count identity: every turning point opens/closes half a cycle.
        const CycleSet cycles = rainflow(series);
        const std::size_t n_tp = turning_points(series).size();
        CHECK(2.0 * total_count(cycles) == doctest::Approx(static_cast<double>(n_tp) - 1.0));

        // Scaling the series scales every range, same counts.
        const double c = 3.25;
        std::vector<double> scaled(series);
        for (double& v : scaled) v *= c;
        const CycleSet cycles_scaled = rainflow(scaled);
        auto a = sorted_cycles(cycles);
        auto b = sorted_cycles(cycles_scaled);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(b[i].first == doctest::Approx(c * a[i].first).epsilon(1e-12));
            CHECK(b[i].second == a[i].second);
        }
    }
}

TEST_CASE("streaming counter matches the batch call") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> step(-1.0, 1.0);
    std::vector<double> series{0.0};
    for (int k = 0; k < 500; ++k) series.push_back(series.back() + step(rng));

    RainflowCounter counter;
    for (double v : series) counter.push(v);
    CHECK(cycle_sets_match(counter.finish(), rainflow(series)));
}

TEST_CASE("cycles to failure on the two-slope curve") {
    const SNCurve sn;
    CHECK(cycles_to_failure(23e6, sn) == doctest::Approx(1e7));
    CHECK(cycles_to_failure(46e6, sn) == doctest::Approx(1.25e6));
    CHECK(cycles_to_failure(11.5e6, sn) == doctest::Approx(3.2e8));

    // Continuous at the knee and strictly decreasing.
    CHECK(cycles_to_failure(23e6 * (1.0 + 1e-9), sn) ==
          doctest::Approx(cycles_to_failure(23e6 * (1.0 - 1e-9), sn)).epsilon(1e-6));
    double prev = cycles_to_failure(1e6, sn);
    for (double s = 2e6; s < 100e6; s += 1e6) {
        const double n = cycles_to_failure(s, sn);
        CHECK(n < prev);
        prev = n;
    }
    CHECK_THROWS_AS(cycles_to_failure(0.0, sn), ParameterError);
}

TEST_CASE("miner damage accumulation") {
    const SNCurve sn;
    SUBCASE("single block") {
        // Range with N = 1e6: fatigue limit * 10^(1/3).
        const double range = 23e6 * std::cbrt(10.0);
        CHECK(damage_index({{range, 1000.0}}, sn) == doctest::Approx(1e-3).epsilon(1e-9));
    }
    SUBCASE("empty set") { CHECK(damage_index({}, sn) == 0.0); }
    SUBCASE("two blocks add up") {
        CycleSet set{{23e6, 5e6}, {46e6, 2.5e5}};
        CHECK(damage_index(set, sn) == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("appending cycles never decreases damage") {
        CycleSet set;
        double last = 0.0;
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> range(1e6, 60e6);
        for (int i = 0; i < 100; ++i) {
            set.push_back({range(rng), 1.0});
            const double d = damage_index(set, sn);
            CHECK(d >= last);
            last = d;
        }
    }
}

TEST_CASE("concatenated blocks are at least as damaging as their parts") {
    const SNCurve sn;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> step(-8e6, 8e6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> a{30e6};
        for (int k = 0; k < 80; ++k) a.push_back(a.back() + step(rng));
        std::vector<double> b{a.back()};
        for (int k = 0; k < 80; ++k) b.push_back(b.back() + step(rng));

        std::vector<double> joined(a);
        joined.insert(joined.end(), b.begin() + 1, b.end());

        const double d_joined = damage_index(rainflow(joined), sn);
        const double d_parts = damage_index(rainflow(a), sn) + damage_index(rainflow(b), sn);
        CHECK(d_joined >= d_parts - 1e-12 * std::max(1.0, d_parts));
    }
}

TEST_CASE("relative damage index") {
    const std::vector<double> base{1e-3, 4e-3, 2e-3};
    SUBCASE("identity run normalizes to 1") {
        const std::vector<double> r = rdi(base, base);
        CHECK(*std::max_element(r.begin(), r.end()) == doctest::Approx(1.0));
    }
    SUBCASE("zero damage maps to zero") {
        const std::vector<double> zero{0.0, 0.0, 0.0};
        const std::vector<double> r = rdi(zero, base);
        for (double v : r) CHECK(v == 0.0);
    }
    SUBCASE("all-zero base is rejected") {
        const std::vector<double> zero{0.0, 0.0, 0.0};
        CHECK_THROWS_AS(rdi(base, zero), ParameterError);
    }
    SUBCASE("length mismatch is rejected") {
        const std::vector<double> two{1.0, 2.0};
        CHECK_THROWS_AS(rdi(two, base), ParameterError);
    }
}
