#include "penstock/hydraulics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "penstock/errors.hpp"

namespace penstock {

CircuitModel build_circuit(const PlantParameters& params, double q_ref) {
    params.validate();
    if (!(std::isfinite(q_ref) && q_ref > 0.0)) {
        throw ParameterError("build_circuit: reference flow must be positive and finite");
    }
    CircuitModel c;
    c.params = params.materialized();
    const double area = c.params.cross_section_m2();
    const double dx = c.params.element_length_m();
    const double g = c.params.gravity_ms2;

    c.element_length_m = dx;
    c.element_count = c.params.element_count;
    c.friction_coeff = c.params.darcy_friction * dx /
                       (2.0 * g * c.params.penstock_diameter_m * area * area);
    c.resistance = c.friction_coeff * std::abs(q_ref);
    c.inductance = dx / (g * area);
    c.capacitance = g * area * dx / (c.params.wave_speed_ms * c.params.wave_speed_ms);
    c.turbine_inductance = c.params.turbine_inductance;
    return c;
}

double turbine_head(double turbine_flow, double vane, const PlantParameters& params) {
    const double y = std::max(vane, kMinVaneOpening);
    const double q_rel = turbine_flow / (y * params.nominal_discharge_m3s);
    return params.nominal_head_m * q_rel * q_rel;
}

double turbine_head_dflow(double turbine_flow, double vane, const PlantParameters& params) {
    const double y = std::max(vane, kMinVaneOpening);
    const double qn = params.nominal_discharge_m3s;
    return 2.0 * params.nominal_head_m * turbine_flow / (y * y * qn * qn);
}

double turbine_head_dvane(double turbine_flow, double vane, const PlantParameters& params) {
    const double y = std::max(vane, kMinVaneOpening);
    const double qn = params.nominal_discharge_m3s;
    return -2.0 * params.nominal_head_m * turbine_flow * turbine_flow / (y * y * y * qn * qn);
}

double turbine_torque(double turbine_flow, double turbine_head_m, double rotor_speed_rad_s,
                      const PlantParameters& params) {
    if (!(rotor_speed_rad_s > 0.0)) {
        throw ParameterError("turbine_torque: rotor speed must be positive");
    }
    return params.turbine_efficiency * params.water_density_kgm3 * params.gravity_ms2 *
           turbine_flow * turbine_head_m / rotor_speed_rad_s;
}

namespace {

void check_state(const StateVector& x, const CircuitModel& circuit) {
    if (!x.data.allFinite()) {
        throw InstabilityError("hydraulic state contains non-finite entries");
    }
    const double limit = 2.0 * circuit.params.upstream_head_m;
    for (int i = 0; i < x.element_count; ++i) {
        if (std::abs(x.head(i)) > limit) {
            throw InstabilityError("head at element " + std::to_string(i + 1) +
                                   " diverged: " + std::to_string(x.head(i)) + " m");
        }
    }
}

}  // namespace

StateVector derivative(const StateVector& x, const HydraulicInputs& u, const CircuitModel& circuit) {
    check_state(x, circuit);
    const int n = x.element_count;
    StateVector dx = StateVector::zero(n);

    const double inv_l = 1.0 / circuit.inductance;
    const double inv_c = 1.0 / circuit.capacitance;
    const double r = circuit.friction_coeff;

    for (int i = 0; i < n; ++i) {
        const double upstream = (i == 0) ? u.upstream_head_m : x.head(i - 1);
        const double q = x.flow(i);
        dx.flow(i) = (upstream - x.head(i) - r * std::abs(q) * q) * inv_l;

        const double outflow = (i + 1 < n) ? x.flow(i + 1) : x.turbine_flow();
        dx.head(i) = (x.flow(i) - outflow) * inv_c;
    }

    const double h_t = turbine_head(x.turbine_flow(), u.vane, circuit.params);
    dx.turbine_flow() = (x.head(n - 1) - u.downstream_head_m - h_t) / circuit.turbine_inductance;
    return dx;
}

StateVector step_rk4(const StateVector& x, const HydraulicInputs& u, const CircuitModel& circuit,
                     double dt) {
    if (!(dt > 0.0)) throw ParameterError("step_rk4: dt must be positive");
    const double transit = circuit.element_length_m / circuit.params.wave_speed_ms;
    if (dt > transit) {
        throw ParameterError("step_rk4: dt exceeds the per-element wave transit time");
    }

    StateVector k1 = derivative(x, u, circuit);
    StateVector s = x;
    s.data = x.data + 0.5 * dt * k1.data;
    StateVector k2 = derivative(s, u, circuit);
    s.data = x.data + 0.5 * dt * k2.data;
    StateVector k3 = derivative(s, u, circuit);
    s.data = x.data + dt * k3.data;
    StateVector k4 = derivative(s, u, circuit);

    StateVector out = x;
    out.data = x.data + (dt / 6.0) * (k1.data + 2.0 * k2.data + 2.0 * k3.data + k4.data);
    return out;
}

StateVector steady_state(const CircuitModel& circuit, double vane, double upstream_head_m,
                         double downstream_head_m) {
    if (!(vane > 0.0 && vane <= 1.0)) {
        throw ParameterError("steady_state: vane opening must be in (0, 1]");
    }
    const PlantParameters& p = circuit.params;
    const double net = upstream_head_m - downstream_head_m;
    if (!(net > 0.0)) {
        throw InfeasibleOperatingPointError("steady_state: non-positive net head");
    }

    // Head balance residual at uniform flow q: positive when the net head
    // exceeds the friction drops plus the turbine head.
    const auto residual = [&](double q) {
        const double friction = circuit.element_count * circuit.friction_coeff * q * q;
        return net - friction - turbine_head(q, vane, p);
    };

    double lo = 0.0;
    double hi = 2.0 * p.nominal_discharge_m3s;
    if (residual(hi) > 0.0) {
        throw InfeasibleOperatingPointError(
            "steady_state: no flow balance in (0, 2*Q_nom] at vane " + std::to_string(vane));
    }
    // Bisect to machine precision (well past the 1e-10 relative contract);
    // the loop exits when the bracket stops shrinking.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (residual(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double q = 0.5 * (lo + hi);

    StateVector x = StateVector::zero(circuit.element_count);
    double head = upstream_head_m;
    for (int i = 0; i < circuit.element_count; ++i) {
        x.flow(i) = q;
        head -= circuit.friction_coeff * q * q;
        x.head(i) = head;
    }
    x.turbine_flow() = q;
    return x;
}

}  // namespace penstock
