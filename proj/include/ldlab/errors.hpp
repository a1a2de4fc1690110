#pragma once

#include <stdexcept>
#include <string>

namespace ldlab {

/// Invalid input: bad config, malformed model, precondition violation.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An iterative solver hit its budget without meeting its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure: missing input file, unwritable output.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ldlab
