#pragma once

#include <stdexcept>

namespace blowup {

/// Invalid problem parameters (p, n, alpha, tolerances, grids).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the set where an operation is defined.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Solver or quadrature failed to reach the requested accuracy.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evaluation point outside the range covered by a trace.
struct RangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Grid too small or grids that should match do not.
struct GridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Fit window without enough data.
struct WindowError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace blowup
