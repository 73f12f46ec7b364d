#pragma once

// Synthetic fixed-time intersection: Poisson arrivals, linear queue discharge,
// probe sampling and 3 s trajectory sampling, with the true plan alongside.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spat/fcd_model.hpp"

namespace spat {

/// Optional data faults, all off by default.
struct FaultConfig {
  double timestamp_jitter_sd_s = 0.0;  // extra Gaussian noise on stop and start timestamps
  double dropped_stop_fraction = 0.0;  // stopped probes reported without stop details
  double long_parker_fraction = 0.0;   // stopped probes that linger after green
  double long_park_max_s = 60.0;       // lingering time is uniform on [0, this]
};

struct SimConfig {
  SignalPlanTruth plan;
  double arrival_rate_vph = 600.0;  // per approach
  double penetration = 0.1;
  double start_jitter_sd_s = 1.5;
  double queue_discharge_s_per_veh = 2.0;
  int days = 20;
  std::uint64_t seed = 1;

  std::string city = "SYN";
  int road_level = 3;
  Movement movement = Movement::straight;
  double headway_m = 7.0;
  double approach_length_m = 150.0;
  double free_speed_mps = 12.0;
  double discharge_speed_mps = 4.0;
  int sampling_s = 3;
  DayClass day_class = DayClass::weekday;
  std::int64_t first_day_index = 19723;  // 2024-01-01
  std::int64_t span_start_s = 0;
  std::int64_t span_end_s = kSecondsPerDay;
  LocalTime time;
  FaultConfig faults;

  /// Throws DomainError on an invalid plan, rate or fraction.
  void validate() const;
};

/// What actually happened to one stopped probe.
struct VehicleTruth {
  double arrival_ts = 0.0;
  double green_onset_ts = 0.0;
  double true_start_ts = 0.0;
  int queue_position = 0;
};

struct SimResult {
  std::vector<TrajectoryRecord> records;
  SignalPlanTruth truth;
  std::vector<std::optional<VehicleTruth>> vehicle_truth;  // parallel to records; set for stopped probes
};

/// Deterministic in the config, including the seed. Each cycle starts with red.
SimResult simulate(const SimConfig& cfg);

/// Calibration that exactly undoes the simulated queue discharge delay.
CalibrationTable oracle_calibration(const SimConfig& cfg);

/// One all-day period with the given cycle; approaches N and S get `red_s`,
/// E and W get the complement.
SignalPlanTruth fixed_plan(const std::string& intersection_id, int cycle_s, int red_s);

/// Single-approach (N) plan whose cycle and red change at `switch_clock_s`.
SignalPlanTruth switch_plan(const std::string& intersection_id, int cycle_before, int red_before, int cycle_after,
                            int red_after, std::int64_t switch_clock_s);

/// Plan with a cycle drawn from 80..130 s, red 40-60 % of it, random offsets,
/// and optionally a morning change to a different cycle of up to 160 s.
SignalPlanTruth random_plan(const std::string& intersection_id, std::uint64_t seed, bool with_switch);

}  // namespace spat
