#include "spat/error.hpp"

#include <array>
#include <utility>

namespace spat {

namespace {

constexpr std::array<std::pair<EstimationFailure, std::string_view>, 11> kFailureNames{{
    {EstimationFailure::empty_input, "empty_input"},
    {EstimationFailure::low_support, "low_support"},
    {EstimationFailure::no_periodicity, "no_periodicity"},
    {EstimationFailure::unreliable, "unreliable"},
    {EstimationFailure::insufficient_data, "insufficient_data"},
    {EstimationFailure::no_switch_found, "no_switch_found"},
    {EstimationFailure::no_inflection, "no_inflection"},
    {EstimationFailure::degenerate_regression, "degenerate_regression"},
    {EstimationFailure::implausible_red, "implausible_red"},
    {EstimationFailure::unconfirmable, "unconfirmable"},
    {EstimationFailure::vote_rejected, "vote_rejected"},
}};

}  // namespace

std::string_view to_string(EstimationFailure kind) {
  for (const auto& [k, name] : kFailureNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

EstimationFailure parse_estimation_failure(std::string_view text) {
  for (const auto& [k, name] : kFailureNames) {
    if (name == text) return k;
  }
  throw std::invalid_argument("unknown estimation failure: " + std::string(text));
}

EstimationError::EstimationError(EstimationFailure kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace spat
