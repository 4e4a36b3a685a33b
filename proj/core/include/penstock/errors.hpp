#pragma once

#include <stdexcept>
#include <string>

namespace penstock {

/// Invalid or inconsistent physical/configuration parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Simulated state diverged (head outside [0, 2*H_u] or non-finite).
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Rotor angle left the stable region of the swing equation.
class LossOfSynchronismError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No steady-state flow exists for the requested operating point.
class InfeasibleOperatingPointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linearization or discretization produced an unstable model.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (frequency trace, stress series, config).
class IngestionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Automatic tuning routine failed to find a usable setting.
class TuningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace penstock
