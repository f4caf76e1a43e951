#pragma once

#include <stdexcept>
#include <string>

namespace atmen {

/// Malformed user input: bad spec strings, out-of-range parameters,
/// mismatched shapes or measure spaces.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configured cap or budget was exceeded (ball size, window size,
/// materialization configurations).
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric state that contradicts an already-verified property, e.g. an
/// eigenvalue below the clamp window of a kernel that passed the CND test.
class inconsistency_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace atmen
