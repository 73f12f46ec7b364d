#pragma once

// Domain types for floating-car-data (FCD) records and signal timing outputs,
// plus the text formats they are exchanged in.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spat {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kSecondsPerHour = 3600;

/// 16-point compass bearing of the approach a vehicle enters from.
enum class Approach : std::uint8_t { N, NNE, NE, ENE, E, ESE, SE, SSE, S, SSW, SW, WSW, W, WNW, NW, NNW };

enum class Movement : std::uint8_t { left, straight, right, u_turn };

enum class DayClass : std::uint8_t { weekday, weekend };

std::string_view to_string(Approach a);
std::string_view to_string(Movement m);
std::string_view to_string(DayClass d);
std::optional<Approach> parse_approach(std::string_view text);
std::optional<Movement> parse_movement(std::string_view text);
std::optional<DayClass> parse_day_class(std::string_view text);

/// Maps unix seconds onto local calendar days with a fixed UTC offset.
struct LocalTime {
  std::int64_t utc_offset_s = 0;

  std::int64_t day_index(std::int64_t ts) const;
  std::int64_t clock_s(std::int64_t ts) const;
  std::int64_t day_start_ts(std::int64_t day_index) const;
};

/// Saturday and Sunday are weekend days; day 0 (1970-01-01) was a Thursday.
DayClass day_class_of(std::int64_t day_index);

/// One (intersection, approach, movement) stream; the unit every estimator runs on.
struct StreamKey {
  std::string intersection_id;
  Approach approach = Approach::N;
  Movement movement = Movement::straight;

  auto operator<=>(const StreamKey&) const = default;
  bool operator==(const StreamKey&) const = default;
};

std::string to_string(const StreamKey& key);
/// Parses "intersection:approach:movement".
std::optional<StreamKey> parse_stream_key(std::string_view text);

struct StopDetail {
  std::int64_t wait_s = 0;
  double dist_to_stopline_m = 0.0;
  std::int64_t stop_ts = 0;

  bool operator==(const StopDetail&) const = default;
};

/// One map-matched vehicle pass through an intersection approach. `exit_ts`
/// is the stop-line crossing; `entry_ts` is when the vehicle entered the approach.
struct TrajectoryRecord {
  std::string city;
  int road_level = 0;
  std::string intersection_id;
  Approach approach = Approach::N;
  Movement movement = Movement::straight;
  std::int64_t entry_ts = 0;
  std::int64_t exit_ts = 0;
  std::int64_t travel_time = 0;
  std::optional<StopDetail> stop;

  StreamKey key() const { return {intersection_id, approach, movement}; }
  bool operator==(const TrajectoryRecord&) const = default;
};

/// Returns the first violated record invariant, or nullopt when the record is valid.
std::optional<std::string> invariant_violation(const TrajectoryRecord& r);

/// Calibrated stop-to-start transition of a stopped vehicle.
struct StartEvent {
  std::string intersection_id;
  Approach approach = Approach::N;
  Movement movement = Movement::straight;
  std::int64_t raw_start_ts = 0;
  std::int64_t calibrated_start_ts = 0;
  std::int64_t day_index = 0;
  DayClass day_class = DayClass::weekday;

  StreamKey key() const { return {intersection_id, approach, movement}; }
  bool operator==(const StartEvent&) const = default;
};

/// One calibration row. Empty optionals are wildcards (`*` in the file).
struct CalibrationRow {
  std::optional<std::string> city;
  std::optional<int> road_level;
  std::optional<int> hour;
  double slope_s_per_m = 0.0;
  double intercept_s = 0.0;

  bool operator==(const CalibrationRow&) const = default;
};

/// Queue-position start-time calibration, keyed by (city, road level, hour of day).
/// Lookup picks the most specific matching row; an all-wildcard row is mandatory.
class CalibrationTable {
 public:
  struct Coefficients {
    double slope_s_per_m = 0.0;
    double intercept_s = 0.0;
  };

  explicit CalibrationTable(std::vector<CalibrationRow> rows);

  /// Single wildcard row with slope 0 and intercept 0.
  static CalibrationTable neutral();

  Coefficients lookup(std::string_view city, int road_level, int hour) const;
  const std::vector<CalibrationRow>& rows() const { return rows_; }

 private:
  std::vector<CalibrationRow> rows_;
};

/// One time-of-day period of a fixed-time plan. Red durations are per approach.
struct PlanPeriod {
  std::int64_t start_clock_s = 0;
  std::int64_t end_clock_s = kSecondsPerDay;
  int cycle_s = 0;
  std::map<Approach, int> red_s;

  bool operator==(const PlanPeriod&) const = default;
};

/// Ground-truth signal plan used by the synthetic oracle and the evaluator.
struct SignalPlanTruth {
  static constexpr int kMaxCycleS = 600;

  std::string intersection_id;
  std::vector<PlanPeriod> periods;
  std::map<Approach, int> offset_s;

  /// Throws DomainError unless periods tile [0, 86400) and 0 < red < cycle <= 600.
  void validate() const;
  const PlanPeriod& period_at(std::int64_t clock_s) const;
  bool operator==(const SignalPlanTruth&) const = default;
};

/// Estimated timing for one stream over one time-of-day period. A recalled
/// estimate has `valid == false` and names the reason in `status`.
struct PhaseEstimate {
  std::string intersection_id;
  Approach approach = Approach::N;
  Movement movement = Movement::straight;
  std::int64_t period_start_s = 0;
  std::int64_t period_end_s = 0;
  int cycle_s = 0;
  int red_s = 0;
  int green_s = 0;
  bool valid = false;
  std::int64_t support_n = 0;
  double confidence = 0.0;
  std::string status;

  StreamKey key() const { return {intersection_id, approach, movement}; }
  bool operator==(const PhaseEstimate&) const = default;
};

inline constexpr std::string_view kFcdHeader =
    "city,road_level,intersection_id,approach,movement,entry_ts,exit_ts,travel_time,"
    "wait_s,dist_to_stopline_m,stop_ts";
inline constexpr std::string_view kCalibrationHeader = "city,road_level,hour,slope_s_per_m,intercept_s";
inline constexpr std::string_view kEventsHeader =
    "intersection_id,approach,movement,raw_start_ts,calibrated_start_ts,day_index,day_class";

struct FcdReadResult {
  std::vector<TrajectoryRecord> records;
  std::size_t rejected = 0;
  std::vector<std::string> reject_reasons;  // "line N: reason"
};

FcdReadResult parse_fcd(std::istream& in);
FcdReadResult read_fcd(const std::filesystem::path& path);
void write_fcd(std::span<const TrajectoryRecord> records, std::ostream& out);
void write_fcd(std::span<const TrajectoryRecord> records, const std::filesystem::path& path);

CalibrationTable read_calibration(const std::filesystem::path& path);
void write_calibration(const CalibrationTable& table, const std::filesystem::path& path);

std::vector<StartEvent> read_events(const std::filesystem::path& path);
void write_events(std::span<const StartEvent> events, const std::filesystem::path& path);

std::vector<PhaseEstimate> read_estimates(const std::filesystem::path& path);
void write_estimates(std::span<const PhaseEstimate> estimates, const std::filesystem::path& path);
void write_estimates(std::span<const PhaseEstimate> estimates, std::ostream& out);

std::vector<SignalPlanTruth> read_truth(const std::filesystem::path& path);
void write_truth(std::span<const SignalPlanTruth> plans, const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace spat
