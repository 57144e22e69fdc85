#pragma once

#include <stdexcept>
#include <string>

namespace dirfdr {

// Bad caller input: malformed values, out-of-range parameters, empty data.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested null family or parameterisation is not supported.
class UnsupportedFamilyError : public InputError {
 public:
  explicit UnsupportedFamilyError(const std::string& what) : InputError(what) {}
};

// A likelihood row or marginal is identically zero.
class DegenerateLikelihoodError : public std::runtime_error {
 public:
  explicit DegenerateLikelihoodError(const std::string& what) : std::runtime_error(what) {}
};

// An operation was invoked in a state where it is not defined.
class StateError : public std::logic_error {
 public:
  explicit StateError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace dirfdr
