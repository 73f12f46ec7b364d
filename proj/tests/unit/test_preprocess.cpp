#include <algorithm>
#include <map>
#include <set>

#include "catch_amalgamated.hpp"
#include "spat/preprocess.hpp"
#include "support.hpp"

using namespace spat;

namespace {

CalibrationTable linear(double slope, double intercept) {
  CalibrationRow row;
  row.slope_s_per_m = slope;
  row.intercept_s = intercept;
  return CalibrationTable({row});
}

std::map<std::int64_t, std::multiset<std::int64_t>> by_day(const AlignedWindow& w) {
  std::map<std::int64_t, std::multiset<std::int64_t>> out;
  for (const auto& e : w.events) out[e.day_index].insert(e.rel_time_s);
  return out;
}

}  // namespace

TEST_CASE("cleaning rejects implausible records", "[preprocess]") {
  auto ok = testing::stopped_record(1000, 30, 10);
  CHECK_FALSE(clean_violation(ok));

  auto long_wait = testing::stopped_record(1000, 4000, 10);
  CHECK(clean_violation(long_wait));

  auto instant = ok;
  instant.exit_ts = instant.entry_ts;
  instant.travel_time = 0;
  instant.stop.reset();
  CHECK(clean_violation(instant));

  auto far = testing::stopped_record(1000, 30, 250);
  CHECK(clean_violation(far));

  auto fast = ok;
  fast.stop.reset();
  fast.exit_ts = fast.entry_ts + 4;  // 200 m in 4 s
  fast.travel_time = 4;
  CHECK(clean_violation(fast));

  auto slow_trip = ok;
  slow_trip.exit_ts = slow_trip.entry_ts + 1801;
  slow_trip.travel_time = 1801;
  CHECK(clean_violation(slow_trip));

  const std::vector<TrajectoryRecord> all = {ok, long_wait, instant, far, fast, slow_trip};
  const auto r = clean(all);
  CHECK(r.kept.size() == 1);
  CHECK(r.rejected == 5);
}

TEST_CASE("oracle records without faults are all kept", "[preprocess]") {
  auto s = testing::oracle_config(11);
  s.days = 5;
  s.span_start_s = 7 * 3600;
  s.span_end_s = 9 * 3600;
  const auto records = simulate(s).records;
  REQUIRE(records.size() >= 100);
  const std::vector<TrajectoryRecord> first(records.begin(), records.begin() + 100);
  CHECK(clean(first).kept.size() == 100);
  CHECK(clean(records).rejected == 0);
}

TEST_CASE("cleaning is idempotent", "[preprocess][property]") {
  auto s = testing::oracle_config(12);
  s.days = 3;
  s.faults.timestamp_jitter_sd_s = 400;
  const auto once = clean(simulate(s).records);
  const auto twice = clean(once.kept);
  CHECK(twice.rejected == 0);
  CHECK(twice.kept == once.kept);
}

TEST_CASE("calibration arithmetic", "[preprocess]") {
  const auto front = testing::stopped_record(1000, 30, 0);
  CHECK(calibrate(std::vector{front}, linear(0.5, 0))[0].calibrated_start_ts == 1030);

  const auto back = testing::stopped_record(1000, 30, 20);
  const auto e = calibrate(std::vector{back}, linear(0.5, 1))[0];
  CHECK(e.raw_start_ts == 1030);
  CHECK(e.calibrated_start_ts == 1030 - 11);

  const auto clamped = calibrate(std::vector{back}, linear(5, 0))[0];
  CHECK(clamped.calibrated_start_ts == 1000);

  auto moving = back;
  moving.stop.reset();
  CHECK(calibrate(std::vector{moving}, linear(0.5, 1)).empty());
}

TEST_CASE("calibration looks up the hour of the stop", "[preprocess]") {
  CalibrationRow any;
  CalibrationRow eight;
  eight.hour = 8;
  eight.intercept_s = 5;
  const CalibrationTable table({any, eight});
  const auto at_eight = testing::stopped_record(8 * 3600 + 100, 30, 0);
  const auto at_nine = testing::stopped_record(9 * 3600 + 100, 30, 0);
  const auto ev = calibrate(std::vector{at_eight, at_nine}, table);
  CHECK(ev[0].raw_start_ts - ev[0].calibrated_start_ts == 5);
  CHECK(ev[1].raw_start_ts == ev[1].calibrated_start_ts);
}

TEST_CASE("calibration never moves a start later as distance grows", "[preprocess][property]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> slope(0, 1), dist(0, 200), intercept(-5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto table = linear(slope(rng), intercept(rng));
    const double d1 = dist(rng), d2 = d1 + dist(rng) / 4;
    const auto near = calibrate(std::vector{testing::stopped_record(5000, 90, d1)}, table)[0];
    const auto far = calibrate(std::vector{testing::stopped_record(5000, 90, d2)}, table)[0];
    CHECK(far.calibrated_start_ts <= near.calibrated_start_ts);
    CHECK(near.calibrated_start_ts <= near.raw_start_ts);
    CHECK(near.calibrated_start_ts >= 5000);
  }
}

TEST_CASE("oracle calibration pulls starts to the green onset", "[preprocess]") {
  auto s = testing::oracle_config(21, 90, 50, 0.0);
  s.days = 3;
  s.span_start_s = 8 * 3600;
  s.span_end_s = 10 * 3600;
  const auto sim = simulate(s);
  std::size_t checked = 0, within = 0;
  for (std::size_t i = 0; i < sim.records.size(); ++i) {
    const auto& truth = sim.vehicle_truth[i];
    if (!truth || !sim.records[i].stop) continue;
    const auto e = calibrate(std::vector{sim.records[i]}, oracle_calibration(s))[0];
    ++checked;
    within += std::abs(static_cast<double>(e.calibrated_start_ts) - truth->green_onset_ts) <= 2.0;
  }
  REQUIRE(checked > 100);
  CHECK(within == checked);
}

TEST_CASE("superposition anchors each day on its first start", "[preprocess]") {
  const std::vector events = {testing::start_event(19723, 8 * 3600 + 120), testing::start_event(19723, 8 * 3600 + 200)};
  SuperposeConfig cfg;
  cfg.min_events = 1;
  const auto w = superpose(events, DayClass::weekday, 8 * 3600, cfg);
  REQUIRE(w.size() == 2);
  CHECK(w.events[0].rel_time_s == 0);
  CHECK(w.events[1].rel_time_s == 80);
  CHECK(w.per_day_offset_s.at(19723) == 120);
  CHECK(w.window_start_s == 8 * 3600);
  CHECK_FALSE(w.low_support);
}

TEST_CASE("a day shifted by a constant aligns onto the other", "[preprocess]") {
  std::vector<StartEvent> events;
  for (const int t : {100, 190, 280, 300, 370}) {
    events.push_back(testing::start_event(19723, 8 * 3600 + t));
    events.push_back(testing::start_event(19724, 8 * 3600 + t + 37));
  }
  const auto days = by_day(superpose(events, DayClass::weekday, 8 * 3600));
  CHECK(days.at(19723) == days.at(19724));
}

TEST_CASE("alignment is invariant to shifting one day", "[preprocess][property]") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> t(0, 3000), shift(0, 599);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<StartEvent> base;
    for (int d = 0; d < 3; ++d) {
      for (int k = 0; k < 10; ++k) base.push_back(testing::start_event(19723 + d, 8 * 3600 + t(rng)));
    }
    auto shifted = base;
    const int s = shift(rng);
    for (auto& e : shifted) {
      if (e.day_index == 19724) {
        e.calibrated_start_ts += s;
        e.raw_start_ts += s;
      }
    }
    CHECK(by_day(superpose(base, DayClass::weekday, 8 * 3600)) ==
          by_day(superpose(shifted, DayClass::weekday, 8 * 3600)));
  }
}

TEST_CASE("aligned windows satisfy their invariants", "[preprocess][property]") {
  auto s = testing::oracle_config(31);
  s.span_start_s = 7 * 3600;
  s.span_end_s = 10 * 3600;
  const auto events = testing::oracle_events(s);
  for (const std::int64_t start : {7 * 3600, 7 * 3600 + 900, 8 * 3600}) {
    const auto w = superpose(events, DayClass::weekday, start);
    std::map<std::int64_t, std::int64_t> first;
    for (const auto& e : w.events) {
      CHECK(e.rel_time_s >= 0);
      CHECK(e.rel_time_s < 3600);
      auto [it, fresh] = first.try_emplace(e.day_index, e.rel_time_s);
      if (!fresh) it->second = std::min(it->second, e.rel_time_s);
    }
    for (const auto& [day, m] : first) CHECK(m == 0);
    CHECK(std::is_sorted(w.events.begin(), w.events.end(),
                         [](const AlignedEvent& a, const AlignedEvent& b) { return a.rel_time_s < b.rel_time_s; }));
  }
}

TEST_CASE("superposition filters by day class and window", "[preprocess]") {
  const std::vector events = {testing::start_event(19723, 8 * 3600 + 10), testing::start_event(19723, 9 * 3600 + 10),
                              testing::start_event(19728, 8 * 3600 + 10)};  // 19728 is a Saturday
  SuperposeConfig cfg;
  cfg.min_events = 1;
  CHECK(superpose(events, DayClass::weekday, 8 * 3600, cfg).size() == 1);
  CHECK(superpose(events, DayClass::weekend, 8 * 3600, cfg).size() == 1);
  const auto empty = superpose(events, DayClass::weekday, 12 * 3600, cfg);
  CHECK(empty.events.empty());
  CHECK(empty.low_support);
}

TEST_CASE("oracle windows cluster one cycle apart", "[preprocess]") {
  auto s = testing::oracle_config(41, 90, 50, 1.0);
  s.span_start_s = 8 * 3600;
  s.span_end_s = 9 * 3600;
  const auto w = superpose(testing::oracle_events(s), DayClass::weekday, 8 * 3600);
  REQUIRE(w.size() > 300);
  std::size_t near = 0;
  for (const auto& e : w.events) {
    const auto r = e.rel_time_s % 90;
    near += r <= 6 || r >= 84;
  }
  CHECK(static_cast<double>(near) / static_cast<double>(w.size()) > 0.8);
}
