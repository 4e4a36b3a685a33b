#include "penstock/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "penstock/errors.hpp"

namespace penstock {

void SimulationOptions::validate() const {
    if (!(plant_dt_s > 0.0)) throw ParameterError("sim: plant_dt_s must be positive");
    if (!(duration_s > 0.0)) throw ParameterError("sim: duration_s must be positive");
    if (!(warmup_s >= 0.0 && warmup_s < duration_s)) {
        throw ParameterError("sim: warmup_s must be in [0, duration)");
    }
    if (!(operating_point > 0.0 && operating_point <= 1.0)) {
        throw ParameterError("sim: operating_point must be in (0, 1]");
    }
    if (trace_stride < 1) throw ParameterError("sim: trace_stride must be >= 1");
    if (governor_dt_s < 0.0) throw ParameterError("sim: governor_dt_s must be >= 0");
}

GeneratorParams GeneratorConfig::build(const PlantParameters& plant) const {
    GeneratorParams g = GeneratorParams::from_plant(plant, inertia_constant_s);
    if (damping_nms_per_rad > 0.0) g.damping_nms_per_rad = damping_nms_per_rad;
    g.validate();
    return g;
}

void Config::validate() const {
    plant.validate();
    governor.validate();
    sn.validate();
    mpc.validate();
    sim.validate();
    if (!(lpf.cutoff_hz > 0.0)) throw ParameterError("lpf: cutoff_hz must be positive");
    if (fatigue_filter.element < 0 || fatigue_filter.element > plant.element_count) {
        throw ParameterError("fatigue_filter: element out of range");
    }
    if (!(fatigue_filter.band_scale > 0.0)) {
        throw ParameterError("fatigue_filter: band_scale must be positive");
    }
    if (sim.plant_dt_s > plant.element_length_m() / plant.wave_speed_ms) {
        throw ParameterError("sim: plant_dt_s exceeds the element wave transit time");
    }
}

Config Config::materialized() const {
    Config out = *this;
    out.plant = plant.materialized();
    out.validate();
    return out;
}

Config Config::from_toml(const TomlTable& t) {
    Config c;
    const auto version = t.get_int_or("format_version", kConfigFormatVersion);
    if (version != kConfigFormatVersion) {
        throw IngestionError("unsupported config format_version " + std::to_string(version));
    }

    PlantParameters& p = c.plant;
    p.rated_power_w = t.get_double_or("plant.rated_power_w", p.rated_power_w);
    p.nominal_head_m = t.get_double_or("plant.nominal_head_m", p.nominal_head_m);
    p.nominal_discharge_m3s = t.get_double_or("plant.nominal_discharge_m3s", p.nominal_discharge_m3s);
    if (t.has("plant.nominal_speed_rpm")) {
        p.nominal_speed_rad_s = t.get_double("plant.nominal_speed_rpm") * 2.0 * M_PI / 60.0;
    }
    p.nominal_torque_nm = t.get_double_or("plant.nominal_torque_nm", p.nominal_torque_nm);
    p.penstock_length_m = t.get_double_or("plant.penstock_length_m", p.penstock_length_m);
    p.penstock_diameter_m = t.get_double_or("plant.penstock_diameter_m", p.penstock_diameter_m);
    p.wave_speed_ms = t.get_double_or("plant.wave_speed_ms", p.wave_speed_ms);
    p.element_count = static_cast<int>(t.get_int_or("plant.element_count", p.element_count));
    p.wall_thickness_m = t.get_double_or("plant.wall_thickness_m", p.wall_thickness_m);
    p.darcy_friction = t.get_double_or("plant.darcy_friction", p.darcy_friction);
    p.water_density_kgm3 = t.get_double_or("plant.water_density_kgm3", p.water_density_kgm3);
    p.gravity_ms2 = t.get_double_or("plant.gravity_ms2", p.gravity_ms2);
    p.turbine_inductance = t.get_double_or("plant.turbine_inductance", p.turbine_inductance);
    p.turbine_efficiency = t.get_double_or("plant.turbine_efficiency", p.turbine_efficiency);
    p.upstream_head_m = t.get_double_or("plant.upstream_head_m", p.upstream_head_m);
    p.downstream_head_m = t.get_double_or("plant.downstream_head_m", p.downstream_head_m);
    p.pole_pairs = static_cast<int>(t.get_int_or("plant.pole_pairs", p.pole_pairs));
    p.grid_frequency_hz = t.get_double_or("plant.grid_frequency_hz", p.grid_frequency_hz);
    p.elevation_profile_m = t.get_double_array_or("plant.elevation_profile_m", {});

    GovernorConfig& g = c.governor;
    g.kp = t.get_double_or("governor.kp", g.kp);
    g.ki = t.get_double_or("governor.ki", g.ki);
    g.permanent_droop = t.get_double_or("governor.permanent_droop", g.permanent_droop);
    g.vane_rate_limit = t.get_double_or("governor.vane_rate_limit", g.vane_rate_limit);
    g.vane_min = t.get_double_or("governor.vane_min", g.vane_min);
    g.vane_max = t.get_double_or("governor.vane_max", g.vane_max);
    g.deadband_hz = t.get_double_or("governor.deadband_hz", g.deadband_hz);

    c.generator.inertia_constant_s =
        t.get_double_or("generator.inertia_constant_s", c.generator.inertia_constant_s);
    c.generator.damping_nms_per_rad =
        t.get_double_or("generator.damping_nms_per_rad", c.generator.damping_nms_per_rad);

    SNCurve& sn = c.sn;
    sn.slope_below_knee = t.get_double_or("sn.slope_below_knee", sn.slope_below_knee);
    sn.fatigue_limit_pa = t.get_double_or("sn.fatigue_limit_pa", sn.fatigue_limit_pa);
    sn.slope_above_knee = t.get_double_or("sn.slope_above_knee", sn.slope_above_knee);
    sn.knee_cycles = t.get_double_or("sn.knee_cycles", sn.knee_cycles);

    MpcConfig& m = c.mpc;
    m.horizon_steps = static_cast<int>(t.get_int_or("mpc.horizon_steps", m.horizon_steps));
    m.dt_s = t.get_double_or("mpc.dt_s", m.dt_s);
    m.slack_weight = t.get_double_or("mpc.slack_weight", m.slack_weight);
    m.solver_tol = t.get_double_or("mpc.solver_tol", m.solver_tol);
    m.max_iterations = static_cast<int>(t.get_int_or("mpc.max_iterations", m.max_iterations));

    SimulationOptions& s = c.sim;
    s.plant_dt_s = t.get_double_or("sim.plant_dt_s", s.plant_dt_s);
    s.duration_s = t.get_double_or("sim.duration_s", s.duration_s);
    s.warmup_s = t.get_double_or("sim.warmup_s", s.warmup_s);
    s.operating_point = t.get_double_or("sim.operating_point", s.operating_point);
    s.trace_stride = static_cast<int>(t.get_int_or("sim.trace_stride", s.trace_stride));
    s.governor_dt_s = t.get_double_or("sim.governor_dt_s", s.governor_dt_s);

    c.lpf.cutoff_hz = t.get_double_or("lpf.cutoff_hz", c.lpf.cutoff_hz);

    FatigueFilterConfig& ff = c.fatigue_filter;
    ff.element = static_cast<int>(t.get_int_or("fatigue_filter.element", ff.element));
    ff.regularization = t.get_double_or("fatigue_filter.regularization", ff.regularization);
    ff.band_scale = t.get_double_or("fatigue_filter.band_scale", ff.band_scale);
    ff.max_passes = static_cast<int>(t.get_int_or("fatigue_filter.max_passes", ff.max_passes));

    SynthFrequencyParams& sy = c.synth;
    sy.mean_hz = t.get_double_or("synthetic_frequency.mean_hz", sy.mean_hz);
    sy.stddev_hz = t.get_double_or("synthetic_frequency.stddev_hz", sy.stddev_hz);
    sy.reversion_time_s = t.get_double_or("synthetic_frequency.reversion_time_s", sy.reversion_time_s);
    sy.seed = static_cast<std::uint64_t>(t.get_int_or("synthetic_frequency.seed",
                                                      static_cast<std::int64_t>(sy.seed)));

    return c.materialized();
}

Config Config::from_toml_file(const std::string& path) {
    return from_toml(TomlTable::parse_file(path));
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string Config::to_toml() const {
    const Config c = materialized();
    std::ostringstream out;
    out << "format_version = " << kConfigFormatVersion << "\n\n";

    out << "[plant]\n";
    const PlantParameters& p = c.plant;
    out << "rated_power_w = " << fmt(p.rated_power_w) << "\n";
    out << "nominal_head_m = " << fmt(p.nominal_head_m) << "\n";
    out << "nominal_discharge_m3s = " << fmt(p.nominal_discharge_m3s) << "\n";
    out << "nominal_speed_rpm = " << fmt(p.nominal_speed_rad_s * 60.0 / (2.0 * M_PI)) << "\n";
    out << "nominal_torque_nm = " << fmt(p.nominal_torque_nm) << "\n";
    out << "penstock_length_m = " << fmt(p.penstock_length_m) << "\n";
    out << "penstock_diameter_m = " << fmt(p.penstock_diameter_m) << "\n";
    out << "wave_speed_ms = " << fmt(p.wave_speed_ms) << "\n";
    out << "element_count = " << p.element_count << "\n";
    out << "wall_thickness_m = " << fmt(p.wall_thickness_m) << "\n";
    out << "darcy_friction = " << fmt(p.darcy_friction) << "\n";
    out << "water_density_kgm3 = " << fmt(p.water_density_kgm3) << "\n";
    out << "gravity_ms2 = " << fmt(p.gravity_ms2) << "\n";
    out << "turbine_inductance = " << fmt(p.turbine_inductance) << "\n";
    out << "turbine_efficiency = " << fmt(p.turbine_efficiency) << "\n";
    out << "upstream_head_m = " << fmt(p.upstream_head_m) << "\n";
    out << "downstream_head_m = " << fmt(p.downstream_head_m) << "\n";
    out << "pole_pairs = " << p.pole_pairs << "\n";
    out << "grid_frequency_hz = " << fmt(p.grid_frequency_hz) << "\n";
    out << "elevation_profile_m = [";
    for (std::size_t i = 0; i < p.elevation_profile_m.size(); ++i) {
        if (i) out << ", ";
        out << fmt(p.elevation_profile_m[i]);
    }
    out << "]\n\n";

    out << "[governor]\n";
    out << "kp = " << fmt(c.governor.kp) << "\n";
    out << "ki = " << fmt(c.governor.ki) << "\n";
    out << "permanent_droop = " << fmt(c.governor.permanent_droop) << "\n";
    out << "vane_rate_limit = " << fmt(c.governor.vane_rate_limit) << "\n";
    out << "vane_min = " << fmt(c.governor.vane_min) << "\n";
    out << "vane_max = " << fmt(c.governor.vane_max) << "\n";
    out << "deadband_hz = " << fmt(c.governor.deadband_hz) << "\n\n";

    out << "[generator]\n";
    out << "inertia_constant_s = " << fmt(c.generator.inertia_constant_s) << "\n";
    out << "damping_nms_per_rad = " << fmt(c.generator.damping_nms_per_rad) << "\n\n";

    out << "[sn]\n";
    out << "slope_below_knee = " << fmt(c.sn.slope_below_knee) << "\n";
    out << "fatigue_limit_pa = " << fmt(c.sn.fatigue_limit_pa) << "\n";
    out << "slope_above_knee = " << fmt(c.sn.slope_above_knee) << "\n";
    out << "knee_cycles = " << fmt(c.sn.knee_cycles) << "\n\n";

    out << "[mpc]\n";
    out << "horizon_steps = " << c.mpc.horizon_steps << "\n";
    out << "dt_s = " << fmt(c.mpc.dt_s) << "\n";
    out << "slack_weight = " << fmt(c.mpc.slack_weight) << "\n";
    out << "solver_tol = " << fmt(c.mpc.solver_tol) << "\n";
    out << "max_iterations = " << c.mpc.max_iterations << "\n\n";

    out << "[sim]\n";
    out << "plant_dt_s = " << fmt(c.sim.plant_dt_s) << "\n";
    out << "duration_s = " << fmt(c.sim.duration_s) << "\n";
    out << "warmup_s = " << fmt(c.sim.warmup_s) << "\n";
    out << "operating_point = " << fmt(c.sim.operating_point) << "\n";
    out << "trace_stride = " << c.sim.trace_stride << "\n";
    out << "governor_dt_s = " << fmt(c.sim.governor_dt_s) << "\n\n";

    out << "[lpf]\n";
    out << "cutoff_hz = " << fmt(c.lpf.cutoff_hz) << "\n\n";

    out << "[fatigue_filter]\n";
    out << "element = " << c.fatigue_filter.element << "\n";
    out << "regularization = " << fmt(c.fatigue_filter.regularization) << "\n";
    out << "band_scale = " << fmt(c.fatigue_filter.band_scale) << "\n";
    out << "max_passes = " << c.fatigue_filter.max_passes << "\n\n";

    out << "[synthetic_frequency]\n";
    out << "mean_hz = " << fmt(c.synth.mean_hz) << "\n";
    out << "stddev_hz = " << fmt(c.synth.stddev_hz) << "\n";
    out << "reversion_time_s = " << fmt(c.synth.reversion_time_s) << "\n";
    out << "seed = " << c.synth.seed << "\n";

    return out.str();
}

void Config::write_toml_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IngestionError("cannot write config file: " + path);
    out << to_toml();
}

}  // namespace penstock
