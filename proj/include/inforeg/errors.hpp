#pragma once

#include <stdexcept>

namespace inforeg {

/// Raised when a computation fails numerically (divergent integral,
/// non-finite objective, singular system).
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an integral provably diverges (integrand hits a pole).
struct divergent_integral : numerical_error {
    using numerical_error::numerical_error;
};

} // namespace inforeg
