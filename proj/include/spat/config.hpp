#pragma once

// Tunables for every estimation stage, loaded from a flat `key = value` file.
// Keys may be written fully qualified (`cycle.min_ks = 0.05`) or under an
// INI section (`[cycle]` followed by `min_ks = 0.05`). `#` and `;` start comments.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "spat/fcd_model.hpp"

namespace spat {

struct CleanConfig {
  double max_travel_s = 1800.0;
  double max_speed_mps = 40.0;
  double max_wait_s = 3600.0;
  double max_dist_m = 200.0;
  /// Length the mean-speed plausibility check divides by.
  double approach_length_m = 200.0;
};

struct SuperposeConfig {
  std::size_t min_events = 30;
};

struct CycleConfig {
  int k_candidates = 5;
  double min_cycle_s = 30.0;
  double c_max_s = 600.0;
  double min_ks = 0.05;
};

struct TodConfig {
  std::int64_t coarse_window_s = 3600;
  std::int64_t coarse_step_s = 900;
  std::int64_t fine_window_s = 1800;
  std::int64_t fine_step_s = 300;
  double penalty_w = 0.1;
  double c_max_s = 600.0;
  std::int64_t night_start_s = 23 * kSecondsPerHour;
  std::int64_t night_end_s = 5 * kSecondsPerHour;
  /// Cycle estimates closer than this are the same cycle.
  double same_cycle_tol_s = 2.0;
};

struct DurationConfig {
  double alpha = 10.0;
  int grad_window = 3;
  int exclusion_W = 20;
  int min_segment = 5;
  /// Waits are analysed per window of this length inside a period; the period's
  /// red is the median of the window results.
  std::int64_t window_s = 3600;
};

struct EvalConfig {
  std::int64_t slice_s = 1800;
  std::int64_t from_s = 6 * kSecondsPerHour;
  std::int64_t to_s = 21 * kSecondsPerHour;
};

struct EstimatorConfig {
  CleanConfig clean;
  SuperposeConfig superpose;
  CycleConfig cycle;
  TodConfig tod;
  DurationConfig dur;
  EvalConfig eval;
  LocalTime time;
};

/// Reads `key = value` lines into fully qualified keys.
std::map<std::string, std::string> parse_flat_config(std::istream& in);

/// Applies one setting; throws ConfigError for unknown keys or unparsable values.
void apply_setting(EstimatorConfig& cfg, std::string_view key, std::string_view value);

/// Throws ConfigError when settings contradict each other.
void validate_config(const EstimatorConfig& cfg);

EstimatorConfig load_config(const std::filesystem::path& path);

/// Every recognised key with its current value, in file order.
std::string dump_config(const EstimatorConfig& cfg);

/// "HH:MM" or "HH:MM:SS" to seconds since midnight.
std::int64_t parse_clock(std::string_view text);
std::string format_clock(std::int64_t clock_s);

}  // namespace spat
