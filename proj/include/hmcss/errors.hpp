#pragma once

#include <stdexcept>
#include <string>

namespace hmcss {

// Invalid configuration or a kernel/problem capability mismatch detected
// before any sampling work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A gradient (or other optional capability) was requested from an object
// that does not provide it.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The estimation itself broke down at run time (e.g. a subset level with too
// few finite limit-state values, or a period estimate with no usable state).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hmcss
