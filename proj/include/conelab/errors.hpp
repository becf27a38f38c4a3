#pragma once

#include <stdexcept>
#include <string>

namespace conelab {

// Input outside the mathematical domain of an operation (N < 2, p <= N, R > 1, ...).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed structure: too few eigenvalues, empty radius lists, bad mode indices.
class structural_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Expansion with no energy; ratios would be 0/0.
class degenerate_input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// JSON ingestion failure. `field` names the offending key, `line` is 1-based (0 if unknown).
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string field, std::size_t line, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

// Experiment or CLI configuration rejected before any computation.
class config_error : public std::invalid_argument {
 public:
  config_error(std::string parameter, const std::string& what)
      : std::invalid_argument(what), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

// Numerical failure in the mode solver or the quadrature layer.
class solver_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace conelab
