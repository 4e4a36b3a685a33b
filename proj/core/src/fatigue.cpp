#include "penstock/fatigue.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "penstock/errors.hpp"

namespace penstock {

void SNCurve::validate() const {
    if (!(slope_below_knee > 0.0) || !(slope_above_knee > 0.0)) {
        throw ParameterError("sn curve: slopes must be positive");
    }
    if (!(fatigue_limit_pa > 0.0)) throw ParameterError("sn curve: fatigue limit must be positive");
    if (!(knee_cycles > 0.0)) throw ParameterError("sn curve: knee_cycles must be positive");
}

double stress_from_head(double head_m, double elevation_m, const PlantParameters& params) {
    const double k = params.head_to_pressure_pa_per_m();
    return (head_m - elevation_m) * k * params.penstock_diameter_m /
           (2.0 * params.wall_thickness_m);
}

std::vector<double> head_to_stress(std::span<const double> head_series_m, double elevation_m,
                                   const PlantParameters& params) {
    std::vector<double> out;
    out.reserve(head_series_m.size());
    for (double h : head_series_m) out.push_back(stress_from_head(h, elevation_m, params));
    return out;
}

std::vector<double> turning_points(std::span<const double> series) {
    std::vector<double> tp;
    if (series.empty()) return tp;
    tp.push_back(series[0]);
    int direction = 0;
    for (std::size_t i = 1; i < series.size(); ++i) {
        const double d = series[i] - series[i - 1];
        if (d == 0.0) continue;
        const int dir = d > 0.0 ? 1 : -1;
        if (direction != 0 && dir != direction) tp.push_back(series[i - 1]);
        direction = dir;
    }
    if (direction != 0) tp.push_back(series[series.size() - 1]);
    return tp;
}

void RainflowCounter::push_turning_point(double value) {
    ++tp_count_;
    stack_.push_back(value);
    while (stack_.size() >= 3) {
        const std::size_t n = stack_.size();
        const double range_x = std::abs(stack_[n - 1] - stack_[n - 2]);
        const double range_y = std::abs(stack_[n - 2] - stack_[n - 3]);
        if (range_x < range_y) break;
        if (n == 3) {
            // The range under test contains the series start: half cycle,
            // then the start advances.
            if (range_y > 0.0) cycles_.push_back({range_y, 0.5});
            stack_.erase(stack_.begin());
        } else {
            if (range_y > 0.0) cycles_.push_back({range_y, 1.0});
            stack_.erase(stack_.begin() + static_cast<std::ptrdiff_t>(n) - 3,
                         stack_.begin() + static_cast<std::ptrdiff_t>(n) - 1);
        }
    }
}

void RainflowCounter::push(double value) {
    if (finished_) throw std::logic_error("RainflowCounter: push after finish");
    if (warmup_ == 0) {
        prev_ = value;
        warmup_ = 1;
        return;
    }
    if (warmup_ == 1) {
        if (value == prev_) return;
        direction_ = value > prev_ ? 1 : -1;
        push_turning_point(prev_);
        last_ = value;
        warmup_ = 2;
        return;
    }
    const double d = value - last_;
    if (d == 0.0) return;
    const int dir = d > 0.0 ? 1 : -1;
    if (dir != direction_) {
        push_turning_point(last_);
        direction_ = dir;
    }
    last_ = value;
}

CycleSet RainflowCounter::finish() {
    if (finished_) throw std::logic_error("RainflowCounter: finish called twice");
    finished_ = true;
    if (warmup_ == 2) push_turning_point(last_);
    // Residual ranges count as half cycles.
    for (std::size_t i = 0; i + 1 < stack_.size(); ++i) {
        const double range = std::abs(stack_[i + 1] - stack_[i]);
        if (range > 0.0) cycles_.push_back({range, 0.5});
    }
    return std::move(cycles_);
}

std::size_t RainflowCounter::turning_point_count() const {
    return tp_count_ + (warmup_ == 2 && !finished_ ? 1 : 0);
}

CycleSet rainflow(std::span<const double> series) {
    RainflowCounter counter;
    for (double v : series) counter.push(v);
    return counter.finish();
}

double cycles_to_failure(double stress_range_pa, const SNCurve& sn) {
    if (!(stress_range_pa > 0.0)) {
        throw ParameterError("cycles_to_failure: stress range must be positive");
    }
    const double ratio = sn.fatigue_limit_pa / stress_range_pa;
    const double slope =
        (stress_range_pa >= sn.fatigue_limit_pa) ? sn.slope_below_knee : sn.slope_above_knee;
    return sn.knee_cycles * std::pow(ratio, slope);
}

double damage_index(const CycleSet& cycles, const SNCurve& sn) {
    double damage = 0.0;
    for (const Cycle& c : cycles) damage += c.count / cycles_to_failure(c.range, sn);
    return damage;
}

std::vector<double> rdi(std::span<const double> damage_controlled,
                        std::span<const double> damage_base) {
    if (damage_controlled.size() != damage_base.size()) {
        throw ParameterError("rdi: damage vectors must have equal length");
    }
    if (damage_base.empty()) throw ParameterError("rdi: empty damage vectors");
    const double base_max = *std::max_element(damage_base.begin(), damage_base.end());
    if (!(base_max > 0.0)) {
        throw ParameterError("rdi: base-case damage is zero everywhere, RDI undefined");
    }
    std::vector<double> out;
    out.reserve(damage_controlled.size());
    for (double d : damage_controlled) out.push_back(d / base_max);
    return out;
}

}  // namespace penstock
