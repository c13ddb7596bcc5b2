#pragma once

#include <stdexcept>
#include <string>

namespace labornet {

// Malformed or inconsistent input: files, configs, dimensions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN, overflow, or another numerical breakdown with a located cause.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace labornet
