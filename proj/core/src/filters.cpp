#include "penstock/filters.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>

#include "penstock/errors.hpp"
#include "penstock/fatigue.hpp"

namespace penstock {

LowPassFilter::LowPassFilter(double cutoff_hz) : cutoff_hz_(cutoff_hz) {
    if (!(cutoff_hz > 0.0)) throw ParameterError("low-pass filter: cutoff must be positive");
}

double LowPassFilter::step(double input, double dt_s) {
    if (!(dt_s > 0.0)) throw ParameterError("low-pass filter: dt must be positive");
    if (!primed_) {
        state_ = input;
        primed_ = true;
        return state_;
    }
    const double alpha = std::exp(-2.0 * M_PI * cutoff_hz_ * dt_s);
    state_ = alpha * state_ + (1.0 - alpha) * input;
    return state_;
}

void LowPassFilter::reset() {
    primed_ = false;
    state_ = 0.0;
}

std::vector<double> lpf_filter_trace(double cutoff_hz, const std::vector<double>& samples,
                                     double dt_s) {
    LowPassFilter filter(cutoff_hz);
    std::vector<double> out;
    out.reserve(samples.size());
    for (double s : samples) out.push_back(filter.step(s, dt_s));
    return out;
}

LpfTuneResult tune_lpf_cutoff(double target_cc, const std::function<double(double)>& cc_of_cutoff,
                              double cutoff_lo_hz, double cutoff_hi_hz, double tol,
                              int max_iterations) {
    if (!(cutoff_lo_hz > 0.0 && cutoff_hi_hz > cutoff_lo_hz)) {
        throw ParameterError("tune_lpf_cutoff: invalid bracket");
    }
    LpfTuneResult best;

    const auto consider = [&](double cutoff, double cc) {
        if (best.iterations == 0 || std::abs(cc - target_cc) < std::abs(best.achieved_cc - target_cc)) {
            best.cutoff_hz = cutoff;
            best.achieved_cc = cc;
        }
        ++best.iterations;
    };

    double cc_hi = cc_of_cutoff(cutoff_hi_hz);
    consider(cutoff_hi_hz, cc_hi);
    if (cc_hi <= target_cc + tol) {
        // Filter is already as transparent as the bracket allows.
        best.converged = std::abs(cc_hi - target_cc) <= tol;
        return best;
    }
    double cc_lo = cc_of_cutoff(cutoff_lo_hz);
    consider(cutoff_lo_hz, cc_lo);
    if (cc_lo >= target_cc) {
        best.converged = std::abs(cc_lo - target_cc) <= tol;
        return best;
    }

    double lo = cutoff_lo_hz, hi = cutoff_hi_hz;
    for (int i = 0; i < max_iterations; ++i) {
        const double mid = std::sqrt(lo * hi);
        const double cc = cc_of_cutoff(mid);
        consider(mid, cc);
        if (std::abs(cc - target_cc) <= tol) {
            best.converged = true;
            return best;
        }
        if (cc < target_cc) lo = mid;
        else hi = mid;
    }
    best.converged = std::abs(best.achieved_cc - target_cc) <= tol;
    return best;
}

FrequencyStressModel FrequencyStressModel::build(const CircuitModel& circuit,
                                                 const StateVector& steady, double operating_vane,
                                                 const GovernorConfig& governor,
                                                 double nominal_frequency_hz, double dt_s,
                                                 int element, double horizon_s) {
    if (element < 0) element = circuit.element_count - 1;
    if (element >= circuit.element_count) {
        throw ParameterError("frequency-stress model: element index out of range");
    }
    const auto samples = static_cast<std::size_t>(std::ceil(horizon_s / dt_s));

    // Governor linear response to a unit impulse on u = (f0 - f)/f0. Limits
    // and deadband are ignored (small-signal model).
    std::vector<double> gov(samples, 0.0);
    {
        double integrator = 0.0;
        double vane_prev = 0.0;
        for (std::size_t k = 0; k < samples; ++k) {
            const double u = (k == 0) ? 1.0 : 0.0;
            const double error = u / governor.permanent_droop - vane_prev;
            integrator += governor.ki * error * dt_s;
            vane_prev = governor.kp * error + integrator;
            gov[k] = vane_prev;
        }
    }

    // Plant response of h_element to a unit vane impulse (held one step).
    const ContinuousStateSpace ss = linearize(circuit, steady, operating_vane);
    const DiscreteStateSpace dss = discretize(ss, dt_s);
    std::vector<double> plant(samples, 0.0);
    {
        Eigen::VectorXd v = dss.b_vane;
        const int row = dss.head_index(element);
        for (std::size_t k = 0; k < samples; ++k) {
            plant[k] = v[row];
            if (k + 1 < samples) v = dss.a * v;
        }
    }

    // Chain the two impulse responses (linear convolution via FFT).
    std::size_t n = 1;
    while (n < 2 * samples) n *= 2;
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> gov_f, plant_f;
    std::vector<double> gov_pad(gov), plant_pad(plant);
    gov_pad.resize(n, 0.0);
    plant_pad.resize(n, 0.0);
    fft.fwd(gov_f, gov_pad);
    fft.fwd(plant_f, plant_pad);
    for (std::size_t k = 0; k < n; ++k) gov_f[k] *= plant_f[k];
    std::vector<double> chain;
    fft.inv(chain, gov_f);
    chain.resize(samples);

    const PlantParameters& p = circuit.params;
    const double stress_gain = p.head_to_pressure_pa_per_m() * p.penstock_diameter_m /
                               (2.0 * p.wall_thickness_m);

    FrequencyStressModel model;
    model.dt_s = dt_s;
    model.element = element;
    model.nominal_frequency_hz = nominal_frequency_hz;
    model.sigma_steady_pa =
        stress_from_head(steady.head(element), p.elevation_m(element), p);
    model.stress_impulse_pa.resize(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        model.stress_impulse_pa[k] = chain[k] * stress_gain;
    }
    return model;
}

FatigueFilter::FatigueFilter(FrequencyStressModel model, double sigma_lower_pa,
                             double sigma_upper_pa, double regularization, int max_passes)
    : model_(std::move(model)),
      sigma_lower_(sigma_lower_pa),
      sigma_upper_(sigma_upper_pa),
      regularization_(regularization),
      max_passes_(max_passes) {
    if (!(sigma_lower_ < sigma_upper_)) {
        throw ParameterError("fatigue filter: empty stress band");
    }
    if (!(regularization_ > 0.0)) {
        throw ParameterError("fatigue filter: regularization must be positive");
    }
    if (max_passes_ < 1) throw ParameterError("fatigue filter: max_passes must be >= 1");
}

FatigueFilter::Result FatigueFilter::apply(const std::vector<double>& frequency_hz) const {
    const std::size_t len = frequency_hz.size();
    const std::size_t imp_len = model_.stress_impulse_pa.size();
    if (len == 0) return {};

    std::size_t n = 1;
    while (n < len + imp_len) n *= 2;

    Eigen::FFT<double> fft;
    std::vector<double> imp_pad(model_.stress_impulse_pa);
    imp_pad.resize(n, 0.0);
    std::vector<std::complex<double>> chain_f;
    fft.fwd(chain_f, imp_pad);

    double peak_gain_sq = 0.0;
    for (const auto& c : chain_f) peak_gain_sq = std::max(peak_gain_sq, std::norm(c));
    if (!(peak_gain_sq > 0.0)) throw ModelError("fatigue filter: zero transfer model");
    const double damping = regularization_ * peak_gain_sq;

    const double f0 = model_.nominal_frequency_hz;
    std::vector<double> u(n, 0.0);
    for (std::size_t k = 0; k < len; ++k) u[k] = (f0 - frequency_hz[k]) / f0;

    std::vector<std::complex<double>> buf_f;
    std::vector<double> sigma(n, 0.0);
    const auto predict = [&]() {
        fft.fwd(buf_f, u);
        for (std::size_t k = 0; k < n; ++k) buf_f[k] *= chain_f[k];
        fft.inv(sigma, buf_f);
        for (std::size_t k = 0; k < n; ++k) sigma[k] += model_.sigma_steady_pa;
    };

    Result result;
    predict();
    std::vector<double> violation(n, 0.0);
    for (int pass = 0; pass < max_passes_; ++pass) {
        double worst = 0.0;
        for (std::size_t k = 0; k < len; ++k) {
            const double clipped = std::clamp(sigma[k], sigma_lower_, sigma_upper_);
            violation[k] = clipped - sigma[k];
            worst = std::max(worst, std::abs(violation[k]));
        }
        std::fill(violation.begin() + static_cast<std::ptrdiff_t>(len), violation.end(), 0.0);
        if (worst <= 1e-9 * (sigma_upper_ - sigma_lower_)) break;
        ++result.passes;

        // Regularized (Wiener) inverse of the chain applied to the trim.
        fft.fwd(buf_f, violation);
        for (std::size_t k = 0; k < n; ++k) {
            buf_f[k] = buf_f[k] * std::conj(chain_f[k]) / (std::norm(chain_f[k]) + damping);
        }
        std::vector<double> correction;
        fft.inv(correction, buf_f);
        for (std::size_t k = 0; k < n; ++k) u[k] += correction[k];
        predict();
    }

    for (std::size_t k = 0; k < len; ++k) {
        result.max_residual_violation_pa =
            std::max({result.max_residual_violation_pa, sigma[k] - sigma_upper_,
                      sigma_lower_ - sigma[k]});
    }
    result.max_residual_violation_pa = std::max(result.max_residual_violation_pa, 0.0);

    result.frequency_hz.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
        result.frequency_hz[k] = std::clamp(f0 * (1.0 - u[k]), 45.0, 55.0);
    }
    return result;
}

std::vector<double> fatigue_filter_preprocess(const FatigueFilter& filter,
                                              const std::vector<double>& frequency_hz) {
    return filter.apply(frequency_hz).frequency_hz;
}

}  // namespace penstock
