#pragma once
#include <stdexcept>

namespace cdeq {

// Numerical breakdown at runtime (divergence, repeated non-finite losses).
// Everything else that throws is treated as a validation failure.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cdeq
