#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace penstock {

/// Uniformly sampled grid-frequency signal.
struct FrequencyTrace {
    double sample_period_s = 0.0;
    std::vector<double> samples_hz;
    std::string source;  ///< "file:<path>" or "synthetic:seed=<n>"

    double duration_s() const {
        return sample_period_s * static_cast<double>(samples_hz.size());
    }

    /// Zero-order-hold lookup; t past the end holds the last sample.
    double at(double t_s) const;

    void validate() const;
};

/// Ornstein-Uhlenbeck parameters for the synthetic stand-in trace.
struct SynthFrequencyParams {
    double mean_hz = 50.0;
    double stddev_hz = 0.02;      ///< stationary standard deviation
    double reversion_time_s = 60.0;
    std::uint64_t seed = 1;
};

/// Loads a two-column CSV (time_s, freq_hz; header optional). Rejects
/// non-monotone time, gaps above 1.5x the sample period, and samples
/// outside [45, 55] Hz, naming the first offending row.
/// expected_period_s <= 0 infers the period from the first two rows.
FrequencyTrace load_frequency_csv(const std::string& path, double expected_period_s = 0.0);

/// Mean-reverting OU process via its exact discretization; deterministic
/// for a fixed seed.
FrequencyTrace synth_frequency(const SynthFrequencyParams& params, double duration_s,
                               double sample_period_s);

/// Resamples by zero-order hold onto a new sample period.
FrequencyTrace resample_zoh(const FrequencyTrace& trace, double new_period_s);

/// Deterministic normal variates: Box-Muller over mt19937_64. The engine's
/// output sequence is fixed by the standard, so seeded traces are
/// reproducible across toolchains (std::normal_distribution is not).
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed);
    double next();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace penstock
