#pragma once

#include <stdexcept>
#include <string>

namespace wbhp {

// Bad argument to a library call (dimension mismatch, empty input, out-of-range).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A matrix that must have full column rank does not (sigma_min/sigma_max <= 1e-10).
class DegenerateCodeword : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Greedy selection ran out of rank-compatible codewords.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unresolvable experiment / training configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Serialized file has the wrong version, kind or shape.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wbhp
