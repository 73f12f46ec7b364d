#include "spat/tod_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace spat {

namespace {

std::vector<StartEvent> of_class(std::span<const StartEvent> events, DayClass day_class) {
  std::vector<StartEvent> out;
  for (const auto& e : events) {
    if (e.day_class == day_class) out.push_back(e);
  }
  return out;
}

std::vector<double> rel_times(const AlignedWindow& w) {
  std::vector<double> out;
  out.reserve(w.size());
  for (const auto& e : w.events) out.push_back(static_cast<double>(e.rel_time_s));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool same_cycle(double a, double b, const TodConfig& cfg) { return std::abs(a - b) <= cfg.same_cycle_tol_s; }

DispersionScore best_of(std::span<const double> times, const SwitchRange& range, const TodConfig& cfg) {
  const auto before = penalized_dispersion(times, *range.cycle_before, cfg.penalty_w, cfg.c_max_s);
  const auto after = penalized_dispersion(times, *range.cycle_after, cfg.penalty_w, cfg.c_max_s);
  return after.total < before.total ? after : before;
}

}  // namespace

CoarseScan coarse_scan(std::span<const StartEvent> events, DayClass day_class, const EstimatorConfig& cfg, Exec exec) {
  const auto day_events = of_class(events, day_class);
  std::int64_t first = std::numeric_limits<std::int64_t>::max(), last = std::numeric_limits<std::int64_t>::min();
  for (const auto& e : day_events) {
    const auto clock = e.calibrated_start_ts - cfg.time.day_start_ts(e.day_index);
    first = std::min(first, clock);
    last = std::max(last, clock);
  }
  if (day_events.empty() || last - first < 2 * kSecondsPerHour) {
    throw EstimationError(EstimationFailure::insufficient_data, "start events span less than two hours");
  }

  const auto& tod = cfg.tod;
  CoarseScan scan;
  for (std::int64_t s = 0; s + tod.coarse_window_s <= kSecondsPerDay; s += tod.coarse_step_s) {
    scan.windows.push_back({s, std::nullopt, std::nullopt, 0});
  }
  for_each_index(exec, scan.windows.size(), [&](std::size_t i) {
    auto& w = scan.windows[i];
    const auto window = superpose(day_events, day_class, w.start_s, cfg.superpose, cfg.time, tod.coarse_window_s);
    w.support_n = window.size();
    if (window.low_support) {
      w.failure = EstimationFailure::low_support;
      return;
    }
    try {
      w.estimate = select_cycle(window, cfg.cycle);
    } catch (const EstimationError& e) {
      w.failure = e.kind();
    }
  });

  const auto reliable = std::count_if(scan.windows.begin(), scan.windows.end(),
                                      [](const WindowEstimate& w) { return w.reliable(); });
  if (reliable < 2) {
    throw EstimationError(EstimationFailure::insufficient_data,
                          std::to_string(reliable) + " reliable coarse windows");
  }
  scan.candidate_ranges = find_candidate_ranges(scan.windows, tod);
  return scan;
}

std::vector<SwitchRange> find_candidate_ranges(std::span<const WindowEstimate> windows, const TodConfig& cfg) {
  const auto mid = [&](const WindowEstimate& w) { return w.start_s + cfg.coarse_window_s / 2; };
  std::vector<SwitchRange> ranges;
  for (std::size_t i = 0; i + 1 < windows.size(); ++i) {
    const auto& a = windows[i];
    const auto& b = windows[i + 1];
    const bool differ = a.reliable() && b.reliable() && !same_cycle(a.cycle_s(), b.cycle_s(), cfg);
    if (!differ && a.reliable() == b.reliable()) continue;
    if (!ranges.empty() && ranges.back().end_s >= mid(a)) {
      ranges.back().end_s = mid(b);
    } else {
      ranges.push_back({mid(a), mid(b), std::nullopt, std::nullopt});
    }
  }
  for (auto& r : ranges) {
    for (const auto& w : windows) {
      if (!w.reliable()) continue;
      if (mid(w) <= r.start_s) r.cycle_before = w.cycle_s();
      if (mid(w) >= r.end_s && !r.cycle_after) r.cycle_after = w.cycle_s();
    }
  }
  return ranges;
}

double dispersion(std::span<const double> times, double cycle) {
  if (!(cycle > 0.0)) throw DomainError("cycle must be positive");
  if (times.empty()) throw DomainError("dispersion of an empty sample");
  std::vector<double> mapped;
  mapped.reserve(times.size());
  std::map<long, std::pair<int, double>> bins;  // bin -> (count, sum)
  for (const double t : times) {
    const double m = map_to_cycle(t, cycle);
    mapped.push_back(m);
    auto& b = bins[static_cast<long>(std::floor(m))];
    ++b.first;
    b.second += m;
  }
  auto mode_bin = bins.begin();
  for (auto it = bins.begin(); it != bins.end(); ++it) {
    if (it->second.first > mode_bin->second.first) mode_bin = it;
  }
  const double mode = mode_bin->second.second / mode_bin->second.first;
  double sum_sq = 0.0;
  for (const double m : mapped) {
    const double d = map_to_cycle(m - mode, cycle);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / static_cast<double>(mapped.size())) / cycle;
}

double cycle_penalty(double cycle, double w, double c_max) {
  const double r = 1.0 - cycle / c_max;
  return w * r * r;
}

DispersionScore penalized_dispersion(std::span<const double> times, double cycle, double w, double c_max) {
  if (!(cycle > 0.0)) throw DomainError("cycle must be positive");
  if (cycle > c_max) throw DomainError("cycle exceeds the maximum cycle");
  DispersionScore s;
  s.cycle_s = cycle;
  s.psi = dispersion(times, cycle);
  s.penalty = cycle_penalty(cycle, w, c_max);
  s.total = s.psi + s.penalty;
  return s;
}

SplitResult fine_search(std::span<const StartEvent> events, DayClass day_class, const SwitchRange& range,
                        const EstimatorConfig& cfg, Exec exec) {
  if (!range.cycle_before || !range.cycle_after) {
    throw EstimationError(EstimationFailure::no_switch_found, "range lacks a reliable cycle on one side");
  }
  const auto& tod = cfg.tod;
  std::vector<std::int64_t> splits;
  for (auto s = range.start_s; s <= range.end_s; s += tod.fine_step_s) splits.push_back(s);

  std::vector<std::optional<SplitResult>> results(splits.size());
  for_each_index(exec, splits.size(), [&](std::size_t i) {
    const auto s = splits[i];
    const auto left = superpose(events, day_class, s - tod.fine_window_s, cfg.superpose, cfg.time, tod.fine_window_s);
    const auto right = superpose(events, day_class, s, cfg.superpose, cfg.time, tod.fine_window_s);
    if (left.low_support || right.low_support) return;
    const auto l = best_of(rel_times(left), range, tod);
    const auto r = best_of(rel_times(right), range, tod);
    if (same_cycle(l.cycle_s, r.cycle_s, tod)) return;
    results[i] = SplitResult{s, l.cycle_s, r.cycle_s, std::max(l.psi, r.psi)};
  });

  std::optional<SplitResult> best;
  for (const auto& r : results) {
    if (r && (!best || r->max_dispersion < best->max_dispersion)) best = r;
  }
  if (!best) throw EstimationError(EstimationFailure::no_switch_found, "no split separates two cycles");
  return *best;
}

TodSchedule build_schedule(std::span<const StartEvent> events, DayClass day_class, const EstimatorConfig& cfg,
                           Exec exec) {
  return build_schedule(events, day_class, coarse_scan(events, day_class, cfg, exec), cfg, exec);
}

TodSchedule build_schedule(std::span<const StartEvent> events, DayClass day_class, const CoarseScan& scan,
                           const EstimatorConfig& cfg, Exec exec) {
  const auto& tod = cfg.tod;
  const auto day_events = of_class(events, day_class);

  std::vector<SplitResult> splits;
  for (auto range : scan.candidate_ranges) {
    if (!range.cycle_before || !range.cycle_after) continue;
    if (same_cycle(*range.cycle_before, *range.cycle_after, tod)) continue;
    range.start_s = std::max(range.start_s, tod.night_end_s);
    range.end_s = std::min(range.end_s, tod.night_start_s);
    if (range.start_s > range.end_s) continue;
    try {
      splits.push_back(fine_search(day_events, day_class, range, cfg, exec));
    } catch (const EstimationError& e) {
      if (e.kind() != EstimationFailure::no_switch_found) throw;
    }
  }
  std::sort(splits.begin(), splits.end(), [](const SplitResult& a, const SplitResult& b) { return a.split_s < b.split_s; });

  const auto windows_inside = [&](std::int64_t start, std::int64_t end) {
    std::vector<const WindowEstimate*> out;
    for (const auto& w : scan.windows) {
      if (w.reliable() && w.start_s >= start && w.start_s + tod.coarse_window_s <= end) out.push_back(&w);
    }
    return out;
  };

  // Period k runs from boundary k to boundary k+1; split k sits at boundary k+1.
  const auto assemble = [&] {
    std::vector<TodPeriod> periods;
    for (std::size_t k = 0; k <= splits.size(); ++k) {
      TodPeriod p;
      p.start_s = k == 0 ? 0 : splits[k - 1].split_s;
      p.end_s = k == splits.size() ? kSecondsPerDay : splits[k].split_s;
      p.max_dispersion_at_split = k == 0 ? 0.0 : splits[k - 1].max_dispersion;
      const auto inside = windows_inside(p.start_s, p.end_s);
      if (!inside.empty()) {
        std::vector<double> cycles, ks;
        for (const auto* w : inside) {
          cycles.push_back(w->cycle_s());
          ks.push_back(w->estimate->best.ks_d);
        }
        p.cycle_s = median(cycles);
        p.confidence = median(ks);
      } else if (k > 0) {
        p.cycle_s = splits[k - 1].cycle_right;
      } else if (!splits.empty()) {
        p.cycle_s = splits[0].cycle_left;
      } else {
        throw EstimationError(EstimationFailure::insufficient_data, "no reliable window inside the day");
      }
      periods.push_back(p);
    }
    return periods;
  };

  auto periods = assemble();
  for (std::size_t k = 0; k + 1 < periods.size();) {
    if (same_cycle(periods[k].cycle_s, periods[k + 1].cycle_s, tod)) {
      splits.erase(splits.begin() + static_cast<std::ptrdiff_t>(k));
      periods = assemble();
      k = 0;
    } else {
      ++k;
    }
  }
  return {std::move(periods)};
}

}  // namespace spat
