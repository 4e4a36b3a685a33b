#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>

#include "penstock/errors.hpp"
#include "penstock/fatigue.hpp"
#include "penstock/results_io.hpp"
#include "penstock/simulation.hpp"

using namespace penstock;

namespace {

Config short_config(double duration_s, double warmup_s = 10.0) {
    Config cfg;
    cfg.sim.duration_s = duration_s;
    cfg.sim.warmup_s = warmup_s;
    cfg.sim.trace_stride = 1;
    return cfg.materialized();
}

FrequencyTrace constant_trace(double duration_s) {
    FrequencyTrace t;
    t.sample_period_s = 0.1;
    t.source = "synthetic:constant";
    const auto n = static_cast<std::size_t>(duration_s / t.sample_period_s) + 2;
    t.samples_hz.assign(n, 50.0);
    return t;
}

FrequencyTrace lively_trace(double duration_s, std::uint64_t seed) {
    SynthFrequencyParams p;
    p.stddev_hz = 0.03;
    p.reversion_time_s = 4.0;
    p.seed = seed;
    return synth_frequency(p, duration_s + 1.0, 0.1);
}

}  // namespace

TEST_CASE("controller names round trip") {
    for (ControllerKind kind : {ControllerKind::base, ControllerKind::mpc, ControllerKind::lpf,
                                ControllerKind::fatigue_filter}) {
        CHECK(controller_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(controller_from_string("bogus"), ParameterError);
}

TEST_CASE("correlation") {
    const std::vector<double> a{1.0, 2.0, 3.0, 4.0};
    const std::vector<double> b{2.0, 4.0, 6.0, 8.0};
    CHECK(correlation(a, a) == doctest::Approx(1.0));
    CHECK(correlation(a, b) == doctest::Approx(1.0));
    std::vector<double> neg;
    for (double v : a) neg.push_back(-v + 10.0);
    CHECK(correlation(a, neg) == doctest::Approx(-1.0));

    const std::vector<double> flat{1.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(correlation(a, flat), ParameterError);
    const std::vector<double> short_vec{1.0};
    CHECK_THROWS_AS(correlation(short_vec, short_vec), ParameterError);

    // Independent seeded noise decorrelates.
    GaussianSource g1(1), g2(2);
    std::vector<double> x, y;
    for (int k = 0; k < 100000; ++k) {
        x.push_back(g1.next());
        y.push_back(g2.next());
    }
    CHECK(std::abs(correlation(x, y)) < 0.02);
}

TEST_CASE("constant frequency keeps the plant still") {
    ExperimentSpec spec;
    spec.config = short_config(60.0);
    spec.controller = ControllerKind::base;
    spec.trace = constant_trace(60.0);

    const SimulationResult res = run_simulation(spec);
    CHECK_FALSE(res.aborted);
    // No frequency deviation: the vane never moves and nothing cycles.
    for (double y : res.full_vane_actuated) {
        CHECK(y == doctest::Approx(spec.config.sim.operating_point).epsilon(1e-9));
    }
    for (double d : res.damage) CHECK(d == 0.0);
    CHECK(res.correlation_cc == doctest::Approx(1.0));
    CHECK(res.band_compliance == 1.0);
}

TEST_CASE("metrics are recomputable from the stored traces") {
    ExperimentSpec spec;
    spec.config = short_config(120.0, 10.0);
    spec.controller = ControllerKind::base;
    spec.trace = lively_trace(120.0, 77);

    const SimulationResult res = run_simulation(spec);
    REQUIRE_FALSE(res.aborted);
    REQUIRE(res.trace_stride == 1);

    const std::size_t start = metrics_start_index(spec.config.sim.warmup_s, res.plant_dt_s);

    // CC from the stored traces.
    const std::span<const double> ref(res.vane_reference);
    const std::span<const double> act(res.vane_actuated);
    CHECK(correlation(ref.subspan(start), act.subspan(start)) == res.correlation_cc);

    // Damage per element from the stored heads.
    const PlantParameters& plant = spec.config.plant;
    const double gain = plant.head_to_pressure_pa_per_m() * plant.penstock_diameter_m /
                        (2.0 * plant.wall_thickness_m);
    for (int i = 0; i < plant.element_count; ++i) {
        const auto& full = res.heads_m[static_cast<std::size_t>(i)];
        const std::vector<double> tail(full.begin() + static_cast<std::ptrdiff_t>(start),
                                       full.end());
        CycleSet cycles = rainflow(tail);
        for (Cycle& c : cycles) c.range *= gain;
        CHECK(damage_index(cycles, spec.config.sn) == res.damage[static_cast<std::size_t>(i)]);
    }

    // And from a written-and-reloaded CSV (17 significant digits).
    const std::string dir =
        (std::filesystem::temp_directory_path() / "penstock_run_test").string();
    write_run_directory(res, dir);
    const TraceTable table = read_csv(dir + "/traces.csv");
    const auto& h7 = table.column("h7_m");
    REQUIRE(h7.size() == res.heads_m[6].size());
    for (std::size_t k = 0; k < h7.size(); ++k) CHECK(h7[k] == res.heads_m[6][k]);
    std::filesystem::remove_all(dir);
}

TEST_CASE("seeded runs are bitwise deterministic") {
    ExperimentSpec spec;
    spec.config = short_config(90.0);
    spec.controller = ControllerKind::mpc;
    spec.trace = lively_trace(90.0, 11);

    const SimulationResult a = run_simulation(spec);
    const SimulationResult b = run_simulation(spec);
    CHECK(metrics_to_json(a) == metrics_to_json(b));
    CHECK(a.full_vane_actuated == b.full_vane_actuated);
}

TEST_CASE("mpc actuation changes only at its own cadence") {
    ExperimentSpec spec;
    spec.config = short_config(30.0, 0.0);
    spec.controller = ControllerKind::mpc;
    spec.trace = lively_trace(30.0, 5);

    const SimulationResult res = run_simulation(spec);
    REQUIRE_FALSE(res.aborted);
    const auto mpc_stride = static_cast<std::size_t>(
        std::llround(spec.config.mpc.dt_s / spec.config.sim.plant_dt_s));
    for (std::size_t k = 1; k < res.full_vane_actuated.size(); ++k) {
        if (k % mpc_stride != 0) {
            CHECK(res.full_vane_actuated[k] == res.full_vane_actuated[k - 1]);
        }
    }
    CHECK(res.mpc_stats.count > 0);
}

TEST_CASE("governor cadence is configurable") {
    ExperimentSpec spec;
    spec.config = short_config(20.0, 0.0);
    spec.config.sim.governor_dt_s = 0.05;  // 10 plant steps
    spec.config = spec.config.materialized();
    spec.controller = ControllerKind::base;
    spec.trace = lively_trace(20.0, 6);

    const SimulationResult res = run_simulation(spec);
    for (std::size_t k = 1; k < res.full_vane_actuated.size(); ++k) {
        if (k % 10 != 0) {
            CHECK(res.full_vane_actuated[k] == res.full_vane_actuated[k - 1]);
        }
    }
}

TEST_CASE("diverging loop yields an aborted result with partial traces") {
    ExperimentSpec spec;
    spec.config = short_config(60.0, 0.0);
    spec.config.governor.kp = 4e4;
    spec.config.governor.ki = 0.0;
    spec.config.governor.vane_rate_limit = 1e9;
    spec.config = spec.config.materialized();
    spec.controller = ControllerKind::base;
    spec.trace = lively_trace(60.0, 3);

    const SimulationResult res = run_simulation(spec);
    CHECK(res.aborted);
    CHECK_FALSE(res.abort_reason.empty());
    CHECK(res.time_s.size() < 12001);
    CHECK_FALSE(res.time_s.empty());
}

TEST_CASE("comparison requires shared inputs and a base run") {
    const Config cfg = short_config(30.0, 5.0);
    const FrequencyTrace trace = lively_trace(30.0, 21);

    SUBCASE("missing base run") {
        std::vector<ExperimentSpec> specs{{cfg, ControllerKind::mpc, trace}};
        CHECK_THROWS_AS(compare_controllers(specs), ParameterError);
    }
    SUBCASE("different traces rejected") {
        std::vector<ExperimentSpec> specs{{cfg, ControllerKind::base, trace},
                                          {cfg, ControllerKind::mpc, lively_trace(30.0, 22)}};
        CHECK_THROWS_AS(compare_controllers(specs), ParameterError);
    }
    SUBCASE("base normalizes to max rdi 1") {
        std::vector<ExperimentSpec> specs{{cfg, ControllerKind::base, trace},
                                          {cfg, ControllerKind::lpf, trace}};
        const ComparisonReport report = compare_controllers(specs);
        REQUIRE(report.rows.size() == 2);
        CHECK(report.rows[0].max_rdi == doctest::Approx(1.0));
        CHECK(report.rows[1].controller == ControllerKind::lpf);
        CHECK(report.rows[1].max_rdi > 0.0);
    }
}

TEST_CASE("islanded speed probe produces a usable trace") {
    const Config cfg = short_config(30.0);
    const LoopProbe probe = make_islanded_speed_probe(cfg, 20.0);
    const std::vector<double> trace = probe(0.5);
    CHECK(trace.size() > 1000);
    bool finite = true;
    for (double v : trace) finite = finite && std::isfinite(v);
    CHECK(finite);
    // Small gain: the loop must not run away.
    double tail = 0.0;
    for (std::size_t k = trace.size() - 100; k < trace.size(); ++k) {
        tail = std::max(tail, std::abs(trace[k]));
    }
    CHECK(tail < 0.02);
}

TEST_CASE("fatigue filter scale tuner brackets a monotone response") {
    const auto rdi_of_scale = [](double scale) { return 0.2 + 0.5 * scale; };
    const FatigueFilterTuneResult r = tune_fatigue_filter_scale(0.45, rdi_of_scale, 0.05, 1.5);
    CHECK(r.converged);
    CHECK(r.achieved_max_rdi == doctest::Approx(0.45).epsilon(0.12));

    const FatigueFilterTuneResult out = tune_fatigue_filter_scale(5.0, rdi_of_scale, 0.05, 1.5);
    CHECK_FALSE(out.converged);
}
