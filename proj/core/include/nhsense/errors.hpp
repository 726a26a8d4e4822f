// errors.hpp — exception types thrown by the nhsense core library.

#pragma once

#include <stdexcept>
#include <string>

namespace nhsense {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed sensor description (dimension mismatch, bad rates, ...).
struct InvalidSystemError : Error {
    using Error::Error;
};

/// Steady-state quantities requested for dynamics that do not decay.
struct InstabilityError : Error {
    using Error::Error;
};

/// Resolvent pole or (numerically) singular linear system.
struct SingularityError : Error {
    using Error::Error;
};

/// Iterative numeric routine failed to converge.
struct NumericFailureError : Error {
    using Error::Error;
};

/// No positive-semidefinite bath completion found within the search cap.
struct ConstructionInfeasibleError : Error {
    using Error::Error;
};

/// Rotating-wave treatment requested outside its validity regime.
struct RwaInvalidError : Error {
    using Error::Error;
};

/// Malformed configuration text.
struct ConfigError : Error {
    using Error::Error;
};

/// A campaign ran out of budget before finishing its mandatory stage.
struct PartialResultError : Error {
    using Error::Error;
};

}  // namespace nhsense
