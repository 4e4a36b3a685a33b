#pragma once

#include <cmath>
#include <vector>

namespace penstock {

/// Physical constants of the hydropower plant case study.
///
/// Defaults describe a 230 MW medium-head plant with a single Francis
/// turbine and an open-air 1100 m penstock. Values the plant data sheet
/// does not fix (friction factor, wall thickness, reservoir split,
/// turbine inductance) carry documented defaults and stay configurable.
struct PlantParameters {
    double rated_power_w = 230e6;
    double nominal_head_m = 315.0;
    double nominal_discharge_m3s = 85.3;
    double nominal_speed_rad_s = 375.0 * 2.0 * M_PI / 60.0;  // 375 rpm
    double nominal_torque_nm = 5.86e6;
    double penstock_length_m = 1100.0;
    double penstock_diameter_m = 5.0;
    double wave_speed_ms = 1100.0;
    int element_count = 20;
    double wall_thickness_m = 0.05;
    double darcy_friction = 0.02;
    double water_density_kgm3 = 1000.0;
    double gravity_ms2 = 9.81;
    /// Water inertia of the turbine branch. Defaults (when <= 0) to the
    /// inductance of one penstock element.
    double turbine_inductance = -1.0;
    double turbine_efficiency = 0.8724;
    double upstream_head_m = 320.0;
    double downstream_head_m = 5.0;
    int pole_pairs = 8;
    double grid_frequency_hz = 50.0;
    /// Elevation of each element's midpoint above the turbine datum.
    /// Empty means a linear drop from the upstream reservoir level to 0.
    std::vector<double> elevation_profile_m;

    /// Penstock cross section, pi*D^2/4.
    double cross_section_m2() const {
        return M_PI * penstock_diameter_m * penstock_diameter_m / 4.0;
    }

    /// Spatial discretization interval.
    double element_length_m() const {
        return penstock_length_m / static_cast<double>(element_count);
    }

    /// Nominal electrical pulsation of rotor and turbine, 2*pi*f0/p.
    double nominal_pulsation_rad_s() const {
        return 2.0 * M_PI * grid_frequency_hz / static_cast<double>(pole_pairs);
    }

    /// Head-to-pressure conversion factor k = g * rho (Pa per meter of head).
    double head_to_pressure_pa_per_m() const {
        return gravity_ms2 * water_density_kgm3;
    }

    /// Elevation of element i (0-based), resolving the default profile.
    double elevation_m(int i) const;

    /// Throws ParameterError when any invariant is violated.
    void validate() const;

    /// Returns a copy with derived defaults materialized (turbine
    /// inductance, elevation profile).
    PlantParameters materialized() const;
};

}  // namespace penstock
