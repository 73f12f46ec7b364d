#include "spat/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace spat {

std::optional<std::string> clean_violation(const TrajectoryRecord& r, const CleanConfig& cfg) {
  if (auto bad = invariant_violation(r)) return bad;
  if (r.travel_time <= 0) return "non-positive travel_time";
  if (static_cast<double>(r.travel_time) > cfg.max_travel_s) return "travel_time above limit";
  if (cfg.approach_length_m / static_cast<double>(r.travel_time) > cfg.max_speed_mps) return "mean speed above limit";
  if (r.stop) {
    if (static_cast<double>(r.stop->wait_s) > cfg.max_wait_s) return "wait_s above limit";
    if (r.stop->dist_to_stopline_m > cfg.max_dist_m) return "dist_to_stopline_m above limit";
  }
  return std::nullopt;
}

CleanResult clean(std::span<const TrajectoryRecord> records, const CleanConfig& cfg) {
  CleanResult out;
  out.kept.reserve(records.size());
  for (const auto& r : records) {
    if (clean_violation(r, cfg)) {
      ++out.rejected;
    } else {
      out.kept.push_back(r);
    }
  }
  return out;
}

std::vector<StartEvent> calibrate(std::span<const TrajectoryRecord> records, const CalibrationTable& table,
                                  const LocalTime& time) {
  std::vector<StartEvent> out;
  for (const auto& r : records) {
    if (!r.stop) continue;
    const auto& stop = *r.stop;
    const int hour = static_cast<int>(time.clock_s(stop.stop_ts) / kSecondsPerHour);
    const auto coef = table.lookup(r.city, r.road_level, hour);
    const auto shift = static_cast<std::int64_t>(std::round(coef.slope_s_per_m * stop.dist_to_stopline_m + coef.intercept_s));
    StartEvent e;
    e.intersection_id = r.intersection_id;
    e.approach = r.approach;
    e.movement = r.movement;
    e.raw_start_ts = stop.stop_ts + stop.wait_s;
    e.calibrated_start_ts = std::clamp(e.raw_start_ts - shift, stop.stop_ts, e.raw_start_ts);
    e.day_index = time.day_index(e.calibrated_start_ts);
    e.day_class = day_class_of(e.day_index);
    out.push_back(std::move(e));
  }
  return out;
}

AlignedWindow superpose(std::span<const StartEvent> events, DayClass day_class, std::int64_t window_start_s,
                        const SuperposeConfig& cfg, const LocalTime& time, std::int64_t length_s) {
  AlignedWindow w;
  w.window_start_s = window_start_s;
  w.length_s = length_s;
  w.day_class = day_class;

  std::vector<AlignedEvent> raw;
  for (const auto& e : events) {
    if (e.day_class != day_class) continue;
    const auto clock = e.calibrated_start_ts - time.day_start_ts(e.day_index);
    if (clock < window_start_s || clock >= window_start_s + length_s) continue;
    if (raw.empty()) w.key = e.key();
    raw.push_back({clock - window_start_s, e.day_index});
    auto [it, fresh] = w.per_day_offset_s.try_emplace(e.day_index, clock - window_start_s);
    if (!fresh) it->second = std::min(it->second, clock - window_start_s);
  }
  for (auto& ev : raw) ev.rel_time_s -= w.per_day_offset_s.at(ev.day_index);
  std::sort(raw.begin(), raw.end(), [](const AlignedEvent& a, const AlignedEvent& b) {
    return std::tie(a.rel_time_s, a.day_index) < std::tie(b.rel_time_s, b.day_index);
  });
  w.events = std::move(raw);
  w.low_support = w.events.size() < cfg.min_events;
  return w;
}

}  // namespace spat
