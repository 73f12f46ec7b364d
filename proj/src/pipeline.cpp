#include "spat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace spat {

namespace {

std::vector<StartEvent> of_stream(std::span<const StartEvent> events, const StreamKey& key) {
  std::vector<StartEvent> out;
  for (const auto& e : events) {
    if (e.intersection_id == key.intersection_id && e.approach == key.approach && e.movement == key.movement) {
      out.push_back(e);
    }
  }
  return out;
}

bool same_stream(const TrajectoryRecord& r, const StreamKey& key) {
  return r.intersection_id == key.intersection_id && r.approach == key.approach && r.movement == key.movement;
}

// One stream uses the threads inside the stream; many streams share them out.
std::pair<Exec, Exec> split_exec(Exec exec, std::size_t streams) {
  if (streams <= 1) return {Exec::serial, exec};
  return {exec, Exec::serial};
}

bool in_period(std::int64_t ts, DayClass day_class, std::int64_t start_s, std::int64_t end_s, const LocalTime& time) {
  if (day_class_of(time.day_index(ts)) != day_class) return false;
  const auto clock = time.clock_s(ts);
  return clock >= start_s && clock < end_s;
}

}  // namespace

PreprocessResult preprocess(std::span<const TrajectoryRecord> records, const CalibrationTable& table,
                            const EstimatorConfig& cfg) {
  auto cleaned = clean(records, cfg.clean);
  PreprocessResult out;
  out.events = calibrate(cleaned.kept, table, cfg.time);
  out.kept = std::move(cleaned.kept);
  out.rejected = cleaned.rejected;
  return out;
}

std::vector<StreamKey> stream_keys(std::span<const StartEvent> events) {
  std::set<StreamKey> keys;
  for (const auto& e : events) keys.insert(e.key());
  return {keys.begin(), keys.end()};
}

std::vector<StreamCycles> run_cycle_stage(std::span<const StartEvent> events, DayClass day_class,
                                          const EstimatorConfig& cfg, Exec exec) {
  const auto keys = stream_keys(events);
  std::vector<StreamCycles> out(keys.size());
  const auto [outer, inner] = split_exec(exec, keys.size());
  for_each_index(outer, keys.size(), [&](std::size_t i) {
    auto& sc = out[i];
    sc.key = keys[i];
    sc.day_class = day_class;
    try {
      sc.scan = coarse_scan(of_stream(events, keys[i]), day_class, cfg, inner);
    } catch (const EstimationError& e) {
      sc.failure = e.kind();
      sc.detail = e.what();
    }
  });
  return out;
}

std::vector<StreamSchedule> run_tod_stage(std::span<const StartEvent> events, std::span<const StreamCycles> cycles,
                                          const EstimatorConfig& cfg, Exec exec) {
  std::vector<StreamSchedule> out(cycles.size());
  const auto [outer, inner] = split_exec(exec, cycles.size());
  for_each_index(outer, cycles.size(), [&](std::size_t i) {
    const auto& sc = cycles[i];
    auto& ss = out[i];
    ss.key = sc.key;
    ss.day_class = sc.day_class;
    if (!sc.scan) {
      ss.failure = sc.failure;
      ss.detail = sc.detail;
      return;
    }
    try {
      ss.schedule = build_schedule(of_stream(events, sc.key), sc.day_class, *sc.scan, cfg, inner);
    } catch (const EstimationError& e) {
      ss.failure = e.kind();
      ss.detail = e.what();
    }
  });
  return out;
}

OverlaySamples overlay_samples(std::span<const TrajectoryRecord> records, std::span<const StartEvent> events,
                               const StreamKey& key, DayClass day_class, std::int64_t start_s, std::int64_t end_s,
                               const LocalTime& time) {
  OverlaySamples s;
  for (const auto& e : events) {
    if (e.key() == key && in_period(e.calibrated_start_ts, day_class, start_s, end_s, time)) {
      s.starts.push_back(e.calibrated_start_ts);
    }
  }
  for (const auto& r : records) {
    if (!same_stream(r, key)) continue;
    if (in_period(r.exit_ts, day_class, start_s, end_s, time)) s.crossings.push_back(r.exit_ts);
    if (r.stop && in_period(r.stop->stop_ts, day_class, start_s, end_s, time)) {
      s.waits.emplace_back(r.stop->stop_ts, r.stop->stop_ts + r.stop->wait_s);
    }
  }
  return s;
}

PhaseEstimate estimate_phase(std::span<const TrajectoryRecord> records, std::span<const StartEvent> events,
                             const StreamKey& key, DayClass day_class, const TodPeriod& period,
                             const EstimatorConfig& cfg) {
  PhaseEstimate est;
  est.intersection_id = key.intersection_id;
  est.approach = key.approach;
  est.movement = key.movement;
  est.period_start_s = period.start_s;
  est.period_end_s = period.end_s;
  est.cycle_s = static_cast<int>(std::lround(period.cycle_s));
  est.confidence = period.confidence;

  std::map<std::int64_t, std::vector<double>> waits_by_window;
  std::size_t n_waits = 0;
  for (const auto& r : records) {
    if (same_stream(r, key) && r.stop && in_period(r.stop->stop_ts, day_class, period.start_s, period.end_s, cfg.time)) {
      const auto clock = cfg.time.clock_s(r.stop->stop_ts);
      waits_by_window[(clock - period.start_s) / cfg.dur.window_s].push_back(static_cast<double>(r.stop->wait_s));
      ++n_waits;
    }
  }
  est.support_n = static_cast<std::int64_t>(n_waits);
  try {
    if (est.cycle_s <= 0) throw EstimationError(EstimationFailure::insufficient_data, "no cycle for the period");
    std::vector<double> reds;
    std::map<EstimationFailure, int> failures;
    for (const auto& [window, waits] : waits_by_window) {
      try {
        reds.push_back(analyze_waits(waits, est.cycle_s, cfg.dur).red_s);
      } catch (const EstimationError& e) {
        ++failures[e.kind()];
      }
    }
    if (reds.empty()) {
      auto kind = EstimationFailure::insufficient_data;
      int most = 0;
      for (const auto& [k, n] : failures) {
        if (n > most) {
          kind = k;
          most = n;
        }
      }
      throw EstimationError(kind, "no window produced a red duration");
    }
    std::sort(reds.begin(), reds.end());
    const auto n = reds.size();
    est.red_s = static_cast<int>(std::lround(n % 2 ? reds[n / 2] : 0.5 * (reds[n / 2 - 1] + reds[n / 2])));
    est.green_s = est.cycle_s - est.red_s;
    const auto overlay = build_overlay(
        overlay_samples(records, events, key, day_class, period.start_s, period.end_s, cfg.time), est.cycle_s, cfg.time);
    const auto vote = vote_confirm(overlay, est.cycle_s, est.red_s);
    est.valid = vote.valid;
    est.status = vote.valid ? "ok" : std::string(to_string(EstimationFailure::vote_rejected));
  } catch (const EstimationError& e) {
    est.valid = false;
    est.status = std::string(to_string(e.kind()));
  }
  return est;
}

std::vector<PhaseEstimate> run_duration_stage(std::span<const TrajectoryRecord> records,
                                              std::span<const StartEvent> events,
                                              std::span<const StreamSchedule> schedules, const EstimatorConfig& cfg,
                                              Exec exec) {
  std::vector<std::vector<PhaseEstimate>> per_stream(schedules.size());
  for_each_index(exec, schedules.size(), [&](std::size_t i) {
    const auto& ss = schedules[i];
    std::vector<TrajectoryRecord> stream_records;
    for (const auto& r : records) {
      if (same_stream(r, ss.key)) stream_records.push_back(r);
    }
    const auto stream_events = of_stream(events, ss.key);
    if (!ss.schedule) {
      PhaseEstimate est;
      est.intersection_id = ss.key.intersection_id;
      est.approach = ss.key.approach;
      est.movement = ss.key.movement;
      est.period_start_s = 0;
      est.period_end_s = kSecondsPerDay;
      est.status = ss.failure ? std::string(to_string(*ss.failure)) : "insufficient_data";
      per_stream[i].push_back(est);
      return;
    }
    for (const auto& period : ss.schedule->periods) {
      per_stream[i].push_back(estimate_phase(stream_records, stream_events, ss.key, ss.day_class, period, cfg));
    }
  });
  std::vector<PhaseEstimate> out;
  for (auto& v : per_stream) out.insert(out.end(), v.begin(), v.end());
  return out;
}

PipelineResult run_pipeline(std::span<const TrajectoryRecord> records, const CalibrationTable& table,
                            DayClass day_class, const EstimatorConfig& cfg, Exec exec) {
  PipelineResult r;
  r.pre = preprocess(records, table, cfg);
  r.cycles = run_cycle_stage(r.pre.events, day_class, cfg, exec);
  r.schedules = run_tod_stage(r.pre.events, r.cycles, cfg, exec);
  r.estimates = run_duration_stage(r.pre.kept, r.pre.events, r.schedules, cfg, exec);
  return r;
}

}  // namespace spat
