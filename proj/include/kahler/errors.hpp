#pragma once

#include <stdexcept>
#include <string>

namespace kahler {

/// Shape or argument mismatch.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Metric (or h + eps g) is not invertible where an inverse is required.
struct SingularMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Evaluation outside a model's time window or a t <= 0 request.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Stencil reaches outside the evaluable grid interior.
struct OutOfDomainError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Requested time step violates the explicit-scheme stability cap.
struct StepSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Conformal factor underflowed during a numerical flow.
struct DegenerateMetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input file or scenario could not be parsed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kahler
