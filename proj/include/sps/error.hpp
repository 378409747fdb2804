#pragma once

#include <stdexcept>
#include <string>

namespace sps {

/// Rejected parameters or malformed inputs (grid size, exponent range, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure inside an otherwise valid computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SearchFailure {
  SeedBracketFailed,
  NoStagnationFound,
  NewtonDiverged,
  NodalCountMismatch,
};

std::string to_string(SearchFailure kind);

class SearchError : public std::runtime_error {
 public:
  SearchError(SearchFailure kind, const std::string& what)
      : std::runtime_error(to_string(kind) + ": " + what), kind_(kind) {}

  SearchFailure kind() const noexcept { return kind_; }

 private:
  SearchFailure kind_;
};

}  // namespace sps
