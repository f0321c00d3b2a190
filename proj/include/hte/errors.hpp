#pragma once

#include <stdexcept>
#include <string>

namespace hte {

// Input data or configuration violates a documented precondition.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem access or file parsing failed.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The request is numerically degenerate (rank deficiency, no qualifying
// observations, empty aggregation input).
struct degeneracy_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hte
