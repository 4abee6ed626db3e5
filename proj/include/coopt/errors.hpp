#pragma once
// Error types shared across the library. The CLI maps these to exit codes
// (input_error -> 2, resource_limit_error -> 3).

#include <stdexcept>
#include <string>

namespace coopt {

// Malformed user input: files, parameter values, out-of-bounds data.
struct input_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation would exceed a configured size bound (node cache,
// enumeration count).
struct resource_limit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace coopt
