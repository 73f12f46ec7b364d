#pragma once

// Trajectory cleaning, queue-position calibration of start times, and multi-day
// superposition of start events into aligned analysis windows.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "spat/config.hpp"
#include "spat/fcd_model.hpp"

namespace spat {

struct CleanResult {
  std::vector<TrajectoryRecord> kept;
  std::size_t rejected = 0;
};

/// Drops records with implausible travel time, mean speed, wait or stop distance.
CleanResult clean(std::span<const TrajectoryRecord> records, const CleanConfig& cfg = {});

/// Why `clean` would reject the record, or nullopt if it is kept.
std::optional<std::string> clean_violation(const TrajectoryRecord& r, const CleanConfig& cfg = {});

/// One StartEvent per stopped record, pulled toward the front-of-queue start time.
/// Coefficients are looked up by the record's city, road level and local hour of stop.
std::vector<StartEvent> calibrate(std::span<const TrajectoryRecord> records, const CalibrationTable& table,
                                  const LocalTime& time = {});

struct AlignedEvent {
  std::int64_t rel_time_s = 0;
  std::int64_t day_index = 0;

  bool operator==(const AlignedEvent&) const = default;
};

/// Start events of one stream from many days folded onto a single window. Each
/// day is shifted so its earliest event in the window sits at rel_time 0.
struct AlignedWindow {
  StreamKey key;
  std::int64_t window_start_s = 0;  // local clock seconds
  std::int64_t length_s = 3600;
  DayClass day_class = DayClass::weekday;
  std::vector<AlignedEvent> events;
  std::map<std::int64_t, std::int64_t> per_day_offset_s;
  bool low_support = true;

  std::size_t size() const { return events.size(); }
};

/// Folds the events whose calibrated start falls in [window_start, window_start + length)
/// on days of `day_class`. Other events are ignored. The stream key is taken from
/// the first matching event.
AlignedWindow superpose(std::span<const StartEvent> events, DayClass day_class, std::int64_t window_start_s,
                        const SuperposeConfig& cfg = {}, const LocalTime& time = {}, std::int64_t length_s = 3600);

}  // namespace spat
