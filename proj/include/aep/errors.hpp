#pragma once

#include <stdexcept>

namespace aep {

// Bad configuration or invalid arguments supplied by the caller.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that cannot be processed (degenerate cohort, malformed table...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aep
