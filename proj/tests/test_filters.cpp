#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "penstock/errors.hpp"
#include "penstock/filters.hpp"

using namespace penstock;

TEST_CASE("low-pass filter statics") {
    LowPassFilter filter(2.0);
    const double dt = 1e-3;
    double y = 0.0;
    for (int k = 0; k < 20000; ++k) y = filter.step(3.5, dt);
    CHECK(y == doctest::Approx(3.5).epsilon(1e-12));  // unity DC gain

    // Output stays within the input extrema for a first-order filter.
    filter.reset();
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < 5000; ++k) {
        const double u = (k / 100) % 2 == 0 ? -1.0 : 2.0;
        const double v = filter.step(u, dt);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= -1.0 - 1e-12);
    CHECK(hi <= 2.0 + 1e-12);

    CHECK_THROWS_AS(LowPassFilter(0.0), ParameterError);
}

TEST_CASE("low-pass filter gain at the cutoff frequency") {
    const double cutoff = 1.0;
    const double dt = 1e-4;
    LowPassFilter filter(cutoff);
    std::vector<double> out;
    const int steps = 200000;  // 20 s
    for (int k = 0; k < steps; ++k) {
        out.push_back(filter.step(std::sin(2.0 * M_PI * cutoff * k * dt), dt));
    }
    // Amplitude over the last 10 full periods, after the transient.
    double amp = 0.0;
    for (int k = steps - 100000; k < steps; ++k) amp = std::max(amp, std::abs(out[k]));
    CHECK(amp == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("lpf cutoff tuner") {
    // Monotone synthetic CC curve: cc = c / (c + 1).
    const auto cc_of_cutoff = [](double cutoff) { return cutoff / (cutoff + 1.0); };

    SUBCASE("interior target converges quickly") {
        const LpfTuneResult r = tune_lpf_cutoff(0.9, cc_of_cutoff, 0.01, 50.0, 0.002, 30);
        CHECK(r.converged);
        CHECK(r.iterations <= 30 + 2);
        CHECK(cc_of_cutoff(r.cutoff_hz) == doctest::Approx(0.9).epsilon(0.005));
    }
    SUBCASE("target above the bracket lands on the upper cutoff") {
        const LpfTuneResult r = tune_lpf_cutoff(0.999, cc_of_cutoff, 0.01, 50.0, 0.002, 30);
        CHECK(r.cutoff_hz == doctest::Approx(50.0));
    }
    SUBCASE("unreachable low target reports failure with the best candidate") {
        const LpfTuneResult r = tune_lpf_cutoff(0.0001, cc_of_cutoff, 0.5, 50.0, 0.002, 30);
        CHECK_FALSE(r.converged);
        CHECK(r.cutoff_hz == doctest::Approx(0.5));
    }
}

namespace {

struct FilterRig {
    PlantParameters plant;
    CircuitModel circuit;
    StateVector steady;
    GovernorConfig governor;
    FrequencyStressModel model;
};

FilterRig make_filter_rig() {
    FilterRig rig;
    rig.plant = PlantParameters{}.materialized();
    rig.circuit = build_circuit(rig.plant, rig.plant.nominal_discharge_m3s);
    rig.steady = steady_state(rig.circuit, 0.9, rig.plant.upstream_head_m,
                              rig.plant.downstream_head_m);
    rig.governor.kp = 2.0;
    rig.governor.ki = 0.8;
    rig.model = FrequencyStressModel::build(rig.circuit, rig.steady, 0.9, rig.governor,
                                            50.0, 0.005, -1);
    return rig;
}

}  // namespace

TEST_CASE("frequency-stress model has droop-consistent statics") {
    const FilterRig rig = make_filter_rig();
    // DC gain of the chain: a sustained deviation u moves the gate by
    // u / droop, the steady head barely moves, so the stress response
    // settles near zero compared to its transient peak.
    double dc = 0.0;
    for (double v : rig.model.stress_impulse_pa) dc += v;
    double peak = 0.0;
    for (double v : rig.model.stress_impulse_pa) peak = std::max(peak, std::abs(v));
    CHECK(peak > 0.0);
    CHECK(std::abs(dc) < 40.0 * peak);  // finite, dominated by the transient
    CHECK(rig.model.sigma_steady_pa > 0.0);
}

TEST_CASE("fatigue filter passes compliant traces through unchanged") {
    const FilterRig rig = make_filter_rig();
    const double half = 80e6;  // band far wider than any predicted swing
    const FatigueFilter filter(rig.model, rig.model.sigma_steady_pa - half,
                               rig.model.sigma_steady_pa + half);

    std::vector<double> trace;
    for (int k = 0; k < 4000; ++k) {
        trace.push_back(50.0 + 0.01 * std::sin(2.0 * M_PI * k / 800.0));
    }
    const FatigueFilter::Result r = filter.apply(trace);
    REQUIRE(r.frequency_hz.size() == trace.size());
    double max_dev = 0.0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        max_dev = std::max(max_dev, std::abs(r.frequency_hz[k] - trace[k]));
    }
    CHECK(max_dev / 50.0 <= 1e-3);  // inverse-reconstruction tolerance, pu
    CHECK(r.passes == 0);
}

TEST_CASE("fatigue filter smooths a large step and respects the band") {
    const FilterRig rig = make_filter_rig();
    const double half = 0.5 * 23e6;
    const FatigueFilter filter(rig.model, rig.model.sigma_steady_pa - half,
                               rig.model.sigma_steady_pa + half, 1e-3, 6);

    std::vector<double> trace(24000, 50.0);  // 120 s at 5 ms
    for (std::size_t k = 4000; k < trace.size(); ++k) trace[k] = 49.85;  // -150 mHz step
    const FatigueFilter::Result r = filter.apply(trace);

    // The raw step would overshoot the band; the filtered trace must keep
    // the predicted stress within it (small regularization residual).
    CHECK(r.passes >= 1);
    CHECK(r.max_residual_violation_pa <= 0.05 * half);

    // Visibly smoothed: the one-step jump shrinks.
    double max_jump = 0.0;
    for (std::size_t k = 1; k < r.frequency_hz.size(); ++k) {
        max_jump = std::max(max_jump, std::abs(r.frequency_hz[k] - r.frequency_hz[k - 1]));
    }
    CHECK(max_jump < 0.15);
}

TEST_CASE("fatigue filter rejects bad setups") {
    const FilterRig rig = make_filter_rig();
    CHECK_THROWS_AS(FatigueFilter(rig.model, 10.0, 5.0), ParameterError);
    CHECK_THROWS_AS(FatigueFilter(rig.model, 0.0, 1.0, 0.0), ParameterError);
    CHECK_THROWS_AS(FrequencyStressModel::build(rig.circuit, rig.steady, 0.9, rig.governor,
                                                50.0, 0.005, 99),
                    ParameterError);
}
