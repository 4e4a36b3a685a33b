#pragma once

#include <functional>
#include <vector>

#include "penstock/electromech.hpp"
#include "penstock/hydraulics.hpp"
#include "penstock/linear_model.hpp"

namespace penstock {

/// First-order low-pass filter, exact zero-order-hold discretization of
/// 1/(1 + s/omega_c). Unity DC gain; the state primes on the first sample.
class LowPassFilter {
public:
    explicit LowPassFilter(double cutoff_hz);

    double step(double input, double dt_s);
    void reset();
    double cutoff_hz() const { return cutoff_hz_; }

private:
    double cutoff_hz_;
    double state_ = 0.0;
    bool primed_ = false;
};

/// Applies the filter along a whole uniformly sampled trace.
std::vector<double> lpf_filter_trace(double cutoff_hz, const std::vector<double>& samples,
                                     double dt_s);

struct LpfTuneResult {
    double cutoff_hz = 0.0;
    double achieved_cc = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Bisects the cutoff until the experiment scores the target tracking
/// correlation within tol. `cc_of_cutoff` runs the experiment for a
/// candidate cutoff and returns its CC (monotone increasing in the cutoff).
/// When the bracket cannot reach the target the best candidate is returned
/// with converged = false.
LpfTuneResult tune_lpf_cutoff(double target_cc, const std::function<double(double)>& cc_of_cutoff,
                              double cutoff_lo_hz = 0.01, double cutoff_hi_hz = 50.0,
                              double tol = 0.002, int max_iterations = 30);

/// Discrete impulse response from the normalized frequency deviation
/// (f0 - f)/f0 to the hoop stress of one penstock element, obtained by
/// chaining the governor's linear response with the linearized plant and
/// the head-to-stress gain.
struct FrequencyStressModel {
    std::vector<double> stress_impulse_pa;  ///< response to a unit ZOH impulse
    double dt_s = 0.0;
    double sigma_steady_pa = 0.0;
    int element = 0;  ///< 0-based element index the model predicts
    double nominal_frequency_hz = 50.0;

    static FrequencyStressModel build(const CircuitModel& circuit, const StateVector& steady_state,
                                      double operating_vane, const GovernorConfig& governor,
                                      double nominal_frequency_hz, double dt_s, int element,
                                      double horizon_s = 120.0);
};

/// Nonlinear fatigue-aware filter: predicts the stress of the critical
/// element from the frequency trace with the linear chain, trims values
/// outside the stress band, and reconstructs a compliant frequency trace
/// through the regularized inverse of the chain.
class FatigueFilter {
public:
    FatigueFilter(FrequencyStressModel model, double sigma_lower_pa, double sigma_upper_pa,
                  double regularization = 1e-3, int max_passes = 3);

    struct Result {
        std::vector<double> frequency_hz;
        double max_residual_violation_pa = 0.0;  ///< predicted stress beyond the band
        int passes = 0;
    };

    Result apply(const std::vector<double>& frequency_hz) const;

    double sigma_lower_pa() const { return sigma_lower_; }
    double sigma_upper_pa() const { return sigma_upper_; }

private:
    FrequencyStressModel model_;
    double sigma_lower_;
    double sigma_upper_;
    double regularization_;
    int max_passes_;
};

/// Convenience wrapper returning only the modified trace.
std::vector<double> fatigue_filter_preprocess(const FatigueFilter& filter,
                                              const std::vector<double>& frequency_hz);

}  // namespace penstock
