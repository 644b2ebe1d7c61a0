#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaystab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (non-finite entries, invalid specs, bad files).
class InputError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    SingularMatrixError(std::size_t pivot, double magnitude)
        : Error("matrix is singular to tolerance at pivot " + std::to_string(pivot) +
                " (|pivot| = " + std::to_string(magnitude) + ")"),
          pivot_index(pivot),
          pivot_magnitude(magnitude) {}

    std::size_t pivot_index;
    double pivot_magnitude;
};

/// Iterative method did not settle; carries the last estimate.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last)
        : Error(what), last_estimate(last) {}

    double last_estimate;
};

class NotCertifiedError : public Error {
public:
    using Error::Error;
};

/// Fixed-point iteration diverged or ran out of iterations.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<double> last, double ratio)
        : Error(what), last_iterate(std::move(last)), contraction_ratio(ratio) {}

    std::vector<double> last_iterate;
    double contraction_ratio;
};

class SimulationError : public Error {
public:
    SimulationError(const std::string& what, double t) : Error(what), time(t) {}

    double time;
};

/// The decay fit cannot be applied (non-decaying or degenerate envelope).
class FitInapplicableError : public Error {
public:
    using Error::Error;
};

}  // namespace delaystab
