#pragma once

#include <stdexcept>
#include <string>

namespace nicis {

// Input digits do not determine the requested quantity.
class InsufficientPrecision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HorizonExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegratorTolerance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nicis
