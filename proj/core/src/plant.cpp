#include "penstock/plant.hpp"

#include <cmath>
#include <string>

#include "penstock/errors.hpp"

namespace penstock {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ParameterError("plant parameters: " + what);
}

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

double PlantParameters::elevation_m(int i) const {
    if (!elevation_profile_m.empty()) {
        return elevation_profile_m.at(static_cast<std::size_t>(i));
    }
    // Linear drop from the upstream reservoir level down to the turbine.
    const double frac = (static_cast<double>(i) + 0.5) / static_cast<double>(element_count);
    return upstream_head_m * (1.0 - frac);
}

void PlantParameters::validate() const {
    require(element_count >= 2, "element_count must be >= 2");
    require(positive_finite(rated_power_w), "rated_power_w must be positive");
    require(positive_finite(nominal_head_m), "nominal_head_m must be positive");
    require(positive_finite(nominal_discharge_m3s), "nominal_discharge_m3s must be positive");
    require(positive_finite(nominal_speed_rad_s), "nominal_speed_rad_s must be positive");
    require(positive_finite(nominal_torque_nm), "nominal_torque_nm must be positive");
    require(positive_finite(penstock_length_m), "penstock_length_m must be positive");
    require(positive_finite(penstock_diameter_m), "penstock_diameter_m must be positive");
    require(positive_finite(wave_speed_ms), "wave_speed_ms must be positive");
    require(positive_finite(wall_thickness_m), "wall_thickness_m must be positive");
    require(std::isfinite(darcy_friction) && darcy_friction >= 0.0,
            "darcy_friction must be non-negative");
    require(positive_finite(water_density_kgm3), "water_density_kgm3 must be positive");
    require(positive_finite(gravity_ms2), "gravity_ms2 must be positive");
    require(std::isfinite(turbine_inductance), "turbine_inductance must be finite");
    require(turbine_efficiency > 0.0 && turbine_efficiency <= 1.0,
            "turbine_efficiency must be in (0, 1]");
    require(std::isfinite(upstream_head_m) && std::isfinite(downstream_head_m),
            "reservoir heads must be finite");
    require(upstream_head_m > downstream_head_m && downstream_head_m >= 0.0,
            "upstream_head_m must exceed downstream_head_m >= 0");
    require(pole_pairs >= 1, "pole_pairs must be >= 1");
    require(positive_finite(grid_frequency_hz), "grid_frequency_hz must be positive");

    // Self-consistency of the name-plate data: P / omega must reproduce the
    // nominal torque within 0.5%.
    const double torque_from_power = rated_power_w / nominal_speed_rad_s;
    const double rel = std::abs(torque_from_power - nominal_torque_nm) / nominal_torque_nm;
    require(rel <= 5e-3, "rated power / nominal speed inconsistent with nominal torque");

    if (!elevation_profile_m.empty()) {
        require(elevation_profile_m.size() == static_cast<std::size_t>(element_count),
                "elevation_profile_m length must equal element_count");
        for (std::size_t i = 0; i + 1 < elevation_profile_m.size(); ++i) {
            require(std::isfinite(elevation_profile_m[i]), "elevation entries must be finite");
            require(elevation_profile_m[i + 1] <= elevation_profile_m[i] + 1e-12,
                    "elevation profile must be non-increasing toward the turbine");
        }
    }
}

PlantParameters PlantParameters::materialized() const {
    PlantParameters out = *this;
    if (out.turbine_inductance <= 0.0) {
        out.turbine_inductance = out.element_length_m() / (out.gravity_ms2 * out.cross_section_m2());
    }
    if (out.elevation_profile_m.empty()) {
        out.elevation_profile_m.resize(static_cast<std::size_t>(out.element_count));
        for (int i = 0; i < out.element_count; ++i) {
            out.elevation_profile_m[static_cast<std::size_t>(i)] = elevation_m(i);
        }
    }
    out.validate();
    return out;
}

}  // namespace penstock
