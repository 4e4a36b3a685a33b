#include "penstock/frequency_trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "penstock/errors.hpp"

namespace penstock {

namespace {

constexpr double kPlausibleLowHz = 45.0;
constexpr double kPlausibleHighHz = 55.0;

}  // namespace

double FrequencyTrace::at(double t_s) const {
    if (samples_hz.empty()) throw IngestionError("frequency trace is empty");
    if (t_s <= 0.0) return samples_hz.front();
    auto idx = static_cast<std::size_t>(t_s / sample_period_s);
    if (idx >= samples_hz.size()) idx = samples_hz.size() - 1;
    return samples_hz[idx];
}

void FrequencyTrace::validate() const {
    if (!(sample_period_s > 0.0)) throw IngestionError("frequency trace: non-positive period");
    if (samples_hz.empty()) throw IngestionError("frequency trace: no samples");
    for (std::size_t i = 0; i < samples_hz.size(); ++i) {
        const double f = samples_hz[i];
        if (!std::isfinite(f) || f < kPlausibleLowHz || f > kPlausibleHighHz) {
            throw IngestionError("frequency trace: sample " + std::to_string(i + 1) +
                                 " outside the [45, 55] Hz plausibility gate");
        }
    }
}

FrequencyTrace load_frequency_csv(const std::string& path, double expected_period_s) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open frequency file: " + path);

    FrequencyTrace trace;
    trace.source = "file:" + path;

    std::vector<double> times;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double t = 0.0, f = 0.0;
        if (!(ls >> t >> f)) {
            if (row == 1) continue;  // header
            throw IngestionError(path + ": malformed row " + std::to_string(row));
        }
        if (!std::isfinite(t) || !std::isfinite(f)) {
            throw IngestionError(path + ": non-finite value at row " + std::to_string(row));
        }
        if (!times.empty() && t <= times.back()) {
            throw IngestionError(path + ": non-monotone time at row " + std::to_string(row));
        }
        if (f < kPlausibleLowHz || f > kPlausibleHighHz) {
            throw IngestionError(path + ": frequency outside [45, 55] Hz at row " +
                                 std::to_string(row));
        }
        times.push_back(t);
        trace.samples_hz.push_back(f);
    }
    if (trace.samples_hz.size() < 2) {
        throw IngestionError(path + ": need at least two samples");
    }

    const double period = expected_period_s > 0.0 ? expected_period_s : times[1] - times[0];
    if (!(period > 0.0)) throw IngestionError(path + ": could not determine sample period");
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double gap = times[i] - times[i - 1];
        if (gap > 1.5 * period || gap < 0.5 * period) {
            throw IngestionError(path + ": irregular sampling at row " + std::to_string(i + 1) +
                                 " (gap " + std::to_string(gap) + " s, period " +
                                 std::to_string(period) + " s)");
        }
    }
    trace.sample_period_s = period;
    return trace;
}

GaussianSource::GaussianSource(std::uint64_t seed) : engine_(seed) {}

double GaussianSource::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Uniform draws in (0, 1] from the top 53 bits.
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
    const double u2 =
        (static_cast<double>(engine_() >> 11) + 1.0) * (1.0 / 9007199254740992.0);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

FrequencyTrace synth_frequency(const SynthFrequencyParams& params, double duration_s,
                               double sample_period_s) {
    if (!(duration_s > 0.0) || !(sample_period_s > 0.0)) {
        throw ParameterError("synth_frequency: duration and period must be positive");
    }
    if (!(params.stddev_hz >= 0.0)) throw ParameterError("synth_frequency: stddev must be >= 0");
    if (!(params.reversion_time_s > 0.0)) {
        throw ParameterError("synth_frequency: reversion time must be positive");
    }

    const auto count = static_cast<std::size_t>(std::ceil(duration_s / sample_period_s)) + 1;
    FrequencyTrace trace;
    trace.sample_period_s = sample_period_s;
    trace.source = "synthetic:seed=" + std::to_string(params.seed);
    trace.samples_hz.reserve(count);

    GaussianSource noise(params.seed);
    const double alpha = std::exp(-sample_period_s / params.reversion_time_s);
    const double step_sigma = params.stddev_hz * std::sqrt(1.0 - alpha * alpha);

    double x = params.mean_hz + params.stddev_hz * noise.next();  // stationary start
    for (std::size_t i = 0; i < count; ++i) {
        trace.samples_hz.push_back(std::clamp(x, kPlausibleLowHz, kPlausibleHighHz));
        x = params.mean_hz + alpha * (x - params.mean_hz) + step_sigma * noise.next();
    }
    return trace;
}

FrequencyTrace resample_zoh(const FrequencyTrace& trace, double new_period_s) {
    if (!(new_period_s > 0.0)) throw ParameterError("resample_zoh: period must be positive");
    trace.validate();
    FrequencyTrace out;
    out.sample_period_s = new_period_s;
    out.source = trace.source;
    const auto count =
        static_cast<std::size_t>(std::floor(trace.duration_s() / new_period_s + 1e-9));
    out.samples_hz.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.samples_hz.push_back(trace.at(static_cast<double>(i) * new_period_s));
    }
    return out;
}

}  // namespace penstock
