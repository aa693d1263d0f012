#ifndef PFAFFKIT_ERRORS_HPP
#define PFAFFKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pfaffkit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two values built over different Chart instances were combined.
struct ChartMismatchError : Error {
    ChartMismatchError() : Error("chart mismatch") {}
};

struct UnknownCoordinateError : Error {
    explicit UnknownCoordinateError(const std::string& name)
        : Error("unknown coordinate: " + name) {}
};

/// Division requested by an element that is not a unit of the localized
/// ring; carries the offending element so callers can report which
/// denominator would have to be declared.
struct NotInvertibleError : Error {
    explicit NotInvertibleError(const std::string& what)
        : Error("not invertible in the localized ring (localization needed): " + what) {}
};

struct DegenerateSystemError : Error {
    explicit DegenerateSystemError(const std::string& what)
        : Error("degenerate Pfaffian system: " + what) {}
};

/// An assembled differential left the truncated subspace.
struct TruncationError : Error {
    explicit TruncationError(const std::string& what)
        : Error("truncation not closed: " + what) {}
};

/// A pair of assembled differentials failed to compose to zero.
struct ComplexViolationError : Error {
    explicit ComplexViolationError(const std::string& what)
        : Error("complex violation (d_out * d_in != 0): " + what) {}
};

}  // namespace pfaffkit

#endif
