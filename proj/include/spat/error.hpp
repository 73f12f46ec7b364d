#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spat {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// More than half of the data lines in an input file failed to parse.
class CorruptDatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (C <= 0, empty sample, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Why an estimate could not be produced. Every kind except `empty_input`
/// is a recall: the attempt is reported, not treated as a process failure.
enum class EstimationFailure {
  empty_input,
  low_support,
  no_periodicity,
  unreliable,
  insufficient_data,
  no_switch_found,
  no_inflection,
  degenerate_regression,
  implausible_red,
  unconfirmable,
  vote_rejected,
};

std::string_view to_string(EstimationFailure kind);
EstimationFailure parse_estimation_failure(std::string_view text);

class EstimationError : public std::runtime_error {
 public:
  EstimationError(EstimationFailure kind, const std::string& detail);

  EstimationFailure kind() const noexcept { return kind_; }

 private:
  EstimationFailure kind_;
};

}  // namespace spat
