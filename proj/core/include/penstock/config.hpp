#pragma once

#include <string>

#include "penstock/electromech.hpp"
#include "penstock/fatigue.hpp"
#include "penstock/frequency_trace.hpp"
#include "penstock/mpc.hpp"
#include "penstock/plant.hpp"
#include "penstock/toml.hpp"

namespace penstock {

inline constexpr int kConfigFormatVersion = 1;

struct SimulationOptions {
    double plant_dt_s = 0.005;
    double duration_s = 3600.0;
    double warmup_s = 60.0;        ///< excluded from fatigue and tracking metrics
    double operating_point = 0.9;  ///< initial vane opening / power reference, pu
    int trace_stride = 1;          ///< decimation of stored traces
    double governor_dt_s = 0.0;    ///< 0: run the governor at the plant step

    void validate() const;
};

struct GeneratorConfig {
    double inertia_constant_s = 4.0;
    double damping_nms_per_rad = 0.0;  ///< 0: sized for ~0.7 damping ratio
    GeneratorParams build(const PlantParameters& plant) const;
};

struct LpfConfig {
    double cutoff_hz = 1.46;
};

struct FatigueFilterConfig {
    int element = 0;               ///< 1-based; 0 selects the last element
    double regularization = 1e-3;
    double band_scale = 1.0;       ///< fraction of the stress band used for trimming
    int max_passes = 3;
};

/// Full experiment configuration with materialized defaults.
struct Config {
    PlantParameters plant;
    GovernorConfig governor;
    GeneratorConfig generator;
    SNCurve sn;
    MpcConfig mpc;
    SimulationOptions sim;
    LpfConfig lpf;
    FatigueFilterConfig fatigue_filter;
    SynthFrequencyParams synth;

    static Config from_toml(const TomlTable& table);
    static Config from_toml_file(const std::string& path);

    /// Fully resolved TOML echo; parsing it back reproduces this config.
    std::string to_toml() const;
    void write_toml_file(const std::string& path) const;

    void validate() const;
    /// Returns a copy with derived plant defaults materialized.
    Config materialized() const;
};

}  // namespace penstock
