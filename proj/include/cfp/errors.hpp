#pragma once

#include <stdexcept>
#include <string>

namespace cfp {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An input vector contained a negative component.
struct NegativeInput : Error {
    using Error::Error;
};

/// A computation produced an overflow, NaN, or otherwise non-finite value.
struct NonFiniteResult : Error {
    using Error::Error;
};

/// A mapping claimed to be positive returned a component <= 0.
struct NonPositiveValue : Error {
    using Error::Error;
};

/// An iterative scheme exhausted its budget without meeting its tolerance.
struct NonConverged : Error {
    using Error::Error;
};

/// A spectral-radius precondition (rho(M) < 1) failed.
struct SpectralRadiusTooLarge : Error {
    using Error::Error;
};

/// A certificate lacks the lower-bound fixed point required by the operation.
struct MissingLowerBound : Error {
    using Error::Error;
};

/// The starting point is neither T(x) >= x nor T(x) <= x.
struct NotMonotoneStart : Error {
    using Error::Error;
};

/// A base station has no attached users, so its mapping component would be 0.
struct EmptyCell : Error {
    using Error::Error;
};

/// Scenario sampling discarded too large a fraction of draws.
struct TooManyDiscards : Error {
    using Error::Error;
};

/// File could not be read or written.
struct IoError : Error {
    using Error::Error;
};

/// Malformed scenario, matrix, or configuration input.
struct FormatError : Error {
    using Error::Error;
};

}  // namespace cfp
