#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "penstock/plant.hpp"

namespace penstock {

/// Wohler curve: Basquin slope m1 above the fatigue limit, slope m2 below
/// it, anchored at knee_cycles at the fatigue limit.
struct SNCurve {
    double slope_below_knee = 3.0;   ///< m1, applied at or above the fatigue limit
    double fatigue_limit_pa = 23e6;  ///< effective fatigue limit
    double slope_above_knee = 5.0;   ///< m2, applied below the fatigue limit
    double knee_cycles = 1e7;

    void validate() const;
};

/// One counted stress cycle: range and count (0.5 for residual half cycles).
struct Cycle {
    double range = 0.0;
    double count = 1.0;
};

using CycleSet = std::vector<Cycle>;

/// Converts a head series of one penstock element into hoop stress:
/// sigma(t) = (h(t) - z) * k*D/(2e) with k = g*rho.
std::vector<double> head_to_stress(std::span<const double> head_series_m, double elevation_m,
                                   const PlantParameters& params);

/// Hoop-stress value for a single head sample.
double stress_from_head(double head_m, double elevation_m, const PlantParameters& params);

/// Reduces a series to its turning points (local extrema, endpoints kept,
/// plateaus collapsed).
std::vector<double> turning_points(std::span<const double> series);

/// Rainflow cycle counting (three-point method with residual ranges counted
/// as half cycles). A constant series yields an empty set.
CycleSet rainflow(std::span<const double> series);

/// Streaming rainflow counter, equivalent to rainflow() once finished; lets
/// long simulations count cycles without storing the series.
class RainflowCounter {
public:
    void push(double value);
    /// Closes the residue and returns the cycle set. May be called once.
    CycleSet finish();
    /// Number of turning points seen so far (including a pending last point).
    std::size_t turning_point_count() const;

private:
    void push_turning_point(double value);

    std::vector<double> stack_;
    double prev_ = 0.0;
    double last_ = 0.0;
    int warmup_ = 0;        // 0: empty, 1: one sample seen, 2: running
    int direction_ = 0;     // sign of the last slope
    CycleSet cycles_;
    std::size_t tp_count_ = 0;
    bool finished_ = false;
};

/// Cycles to failure at a stress range, per the two-slope Wohler curve.
double cycles_to_failure(double stress_range_pa, const SNCurve& sn);

/// Miner's rule: D = sum n_j / N(delta_sigma_j).
double damage_index(const CycleSet& cycles, const SNCurve& sn);

/// Relative damage index per element: D_ctrl_i / max_i(D_base_i).
/// Throws ParameterError when the base damage is identically zero.
std::vector<double> rdi(std::span<const double> damage_controlled,
                        std::span<const double> damage_base);

}  // namespace penstock
