#include "spat/synth_oracle.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "spat/error.hpp"

namespace spat {

namespace {

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double sd) { return sd > 0.0 ? std::normal_distribution<double>(0.0, sd)(rng_) : 0.0; }
  double exponential(double rate) { return std::exponential_distribution<double>(rate)(rng_); }
  bool chance(double p) { return p > 0.0 && uniform(0.0, 1.0) < p; }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

std::int64_t to_ts(double t) { return static_cast<std::int64_t>(std::llround(t)); }

}  // namespace

void SimConfig::validate() const {
  plan.validate();
  if (!(arrival_rate_vph > 0.0)) throw DomainError("arrival rate must be positive");
  if (!(penetration >= 0.0 && penetration <= 1.0)) throw DomainError("penetration must be in [0, 1]");
  if (!(start_jitter_sd_s >= 0.0) || !(queue_discharge_s_per_veh >= 0.0)) {
    throw DomainError("jitter and discharge time must be non-negative");
  }
  if (days < 0 || sampling_s <= 0) throw DomainError("days must be >= 0 and sampling_s > 0");
  if (!(headway_m > 0.0 && free_speed_mps > 0.0 && discharge_speed_mps > 0.0 && approach_length_m > 0.0)) {
    throw DomainError("geometry and speeds must be positive");
  }
  if (span_start_s < 0 || span_end_s > kSecondsPerDay || span_start_s >= span_end_s) {
    throw DomainError("simulated span must lie within one day");
  }
  for (const double f : {faults.dropped_stop_fraction, faults.long_parker_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("fault fractions must be in [0, 1]");
  }
}

SimResult simulate(const SimConfig& cfg) {
  cfg.validate();
  SimResult out;
  out.truth = cfg.plan;
  Sampler rng(cfg.seed);

  std::set<Approach> approaches;
  for (const auto& p : cfg.plan.periods) {
    for (const auto& [a, red] : p.red_s) approaches.insert(a);
  }

  const double rate = cfg.arrival_rate_vph / 3600.0;
  const double grid = cfg.sampling_s;
  std::int64_t day = cfg.first_day_index;
  for (int produced = 0; produced < cfg.days; ++day) {
    if (day_class_of(day) != cfg.day_class) continue;
    ++produced;
    const double day_start = static_cast<double>(cfg.time.day_start_ts(day));

    for (const auto approach : approaches) {
      const auto offset_it = cfg.plan.offset_s.find(approach);
      const double offset = offset_it == cfg.plan.offset_s.end() ? 0.0 : offset_it->second;
      std::int64_t queue_cycle = std::numeric_limits<std::int64_t>::min();
      int queued = 0;

      double t = day_start + static_cast<double>(cfg.span_start_s);
      const double end = day_start + static_cast<double>(cfg.span_end_s);
      while (true) {
        t += rng.exponential(rate);
        if (t >= end) break;
        const auto& period = cfg.plan.period_at(static_cast<std::int64_t>(t - day_start));
        const auto red_it = period.red_s.find(approach);
        if (red_it == period.red_s.end()) continue;
        const double cycle = period.cycle_s;
        const double anchor = day_start + static_cast<double>(period.start_clock_s) + offset;
        const auto k = static_cast<std::int64_t>(std::floor((t - anchor) / cycle));
        const double red_onset = anchor + static_cast<double>(k) * cycle;
        const double green = red_onset + red_it->second;
        const bool stops = t < green;
        int position = 0;
        if (stops) {
          if (k != queue_cycle) {
            queue_cycle = k;
            queued = 0;
          }
          position = queued++;
        }
        if (!rng.chance(cfg.penetration)) continue;

        // Each probe reports on its own 3 s sampling grid.
        const double phase = rng.integer(0, cfg.sampling_s - 1);
        const auto on_grid = [&](double x) { return to_ts(phase + grid * std::round((x - phase) / grid)); };

        TrajectoryRecord r;
        r.city = cfg.city;
        r.road_level = cfg.road_level;
        r.intersection_id = cfg.plan.intersection_id;
        r.approach = approach;
        r.movement = cfg.movement;
        std::optional<VehicleTruth> vt;
        if (stops) {
          const double dist = position * cfg.headway_m;
          double start = std::max(green, green + position * cfg.queue_discharge_s_per_veh + rng.normal(cfg.start_jitter_sd_s));
          if (rng.chance(cfg.faults.long_parker_fraction)) start += rng.uniform(0.0, cfg.faults.long_park_max_s);
          vt = VehicleTruth{t, green, start, position};

          auto stop_ts = to_ts(t);
          auto start_ts = std::max(stop_ts, on_grid(start));
          if (cfg.faults.timestamp_jitter_sd_s > 0.0) {
            stop_ts += to_ts(rng.normal(cfg.faults.timestamp_jitter_sd_s));
            start_ts = std::max(stop_ts, start_ts + to_ts(rng.normal(cfg.faults.timestamp_jitter_sd_s)));
          }
          r.exit_ts = std::max(start_ts, on_grid(start + dist / cfg.discharge_speed_mps));
          r.entry_ts = std::min(stop_ts, to_ts(t - (cfg.approach_length_m - dist) / cfg.free_speed_mps));
          if (!rng.chance(cfg.faults.dropped_stop_fraction)) r.stop = StopDetail{start_ts - stop_ts, dist, stop_ts};
        } else {
          r.exit_ts = on_grid(t);
          r.entry_ts = std::min(r.exit_ts, to_ts(t - cfg.approach_length_m / cfg.free_speed_mps));
        }
        r.travel_time = r.exit_ts - r.entry_ts;
        out.records.push_back(std::move(r));
        out.vehicle_truth.push_back(vt);
      }
    }
  }
  return out;
}

CalibrationTable oracle_calibration(const SimConfig& cfg) {
  CalibrationRow row;
  row.slope_s_per_m = cfg.queue_discharge_s_per_veh / cfg.headway_m;
  return CalibrationTable({row});
}

SignalPlanTruth fixed_plan(const std::string& intersection_id, int cycle_s, int red_s) {
  SignalPlanTruth plan;
  plan.intersection_id = intersection_id;
  PlanPeriod p;
  p.cycle_s = cycle_s;
  p.red_s = {{Approach::N, red_s}, {Approach::S, red_s}, {Approach::E, cycle_s - red_s}, {Approach::W, cycle_s - red_s}};
  plan.periods.push_back(p);
  plan.offset_s = {{Approach::N, 0}, {Approach::S, 0}, {Approach::E, red_s}, {Approach::W, red_s}};
  plan.validate();
  return plan;
}

SignalPlanTruth switch_plan(const std::string& intersection_id, int cycle_before, int red_before, int cycle_after,
                            int red_after, std::int64_t switch_clock_s) {
  SignalPlanTruth plan;
  plan.intersection_id = intersection_id;
  plan.periods.push_back({0, switch_clock_s, cycle_before, {{Approach::N, red_before}}});
  plan.periods.push_back({switch_clock_s, kSecondsPerDay, cycle_after, {{Approach::N, red_after}}});
  plan.offset_s = {{Approach::N, 0}};
  plan.validate();
  return plan;
}

SignalPlanTruth random_plan(const std::string& intersection_id, std::uint64_t seed, bool with_switch) {
  Sampler rng(seed);
  const auto draw_period = [&](std::int64_t start, std::int64_t end, int cycle) {
    const int red = static_cast<int>(std::lround(cycle * rng.uniform(0.4, 0.6)));
    PlanPeriod p{start, end, cycle, {}};
    p.red_s = {{Approach::N, red}, {Approach::S, red}, {Approach::E, cycle - red}, {Approach::W, cycle - red}};
    return p;
  };
  SignalPlanTruth plan;
  plan.intersection_id = intersection_id;
  const int cycle = 10 * rng.integer(8, 13);
  if (with_switch) {
    const std::int64_t at = kSecondsPerHour * rng.integer(7, 10);
    int second = 10 * rng.integer(8, 13);
    if (second == cycle) second = cycle + 30;
    plan.periods.push_back(draw_period(0, at, cycle));
    plan.periods.push_back(draw_period(at, kSecondsPerDay, second));
  } else {
    plan.periods.push_back(draw_period(0, kSecondsPerDay, cycle));
  }
  const int ns_offset = rng.integer(0, cycle - 1);
  const int red = plan.periods.front().red_s.at(Approach::N);
  plan.offset_s = {{Approach::N, ns_offset}, {Approach::S, ns_offset}, {Approach::E, ns_offset + red},
                   {Approach::W, ns_offset + red}};
  plan.validate();
  return plan;
}

}  // namespace spat
