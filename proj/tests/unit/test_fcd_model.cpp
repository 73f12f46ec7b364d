#include <sstream>

#include "catch_amalgamated.hpp"
#include "spat/error.hpp"
#include "spat/fcd_model.hpp"
#include "spat/json_io.hpp"
#include "support.hpp"

using namespace spat;

namespace {

std::string fcd_text(const std::vector<std::string>& lines) {
  std::string s(kFcdHeader);
  s += '\n';
  for (const auto& l : lines) s += l + '\n';
  return s;
}

FcdReadResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_fcd(in);
}

}  // namespace

TEST_CASE("well-formed lines parse to records", "[fcd]") {
  const auto r = parse(fcd_text({"X,2,I9,N,straight,100,160,60,30,14,110", "X,2,I9,E,left,200,230,30,,,",
                                 "X,1,I9,SSW,u_turn,300,301,1,0,0,300"}));
  REQUIRE(r.records.size() == 3);
  CHECK(r.rejected == 0);
  CHECK(r.records[0].stop == StopDetail{30, 14.0, 110});
  CHECK_FALSE(r.records[1].stop);
  CHECK(r.records[2].approach == Approach::SSW);
  CHECK(r.records[2].movement == Movement::u_turn);
}

TEST_CASE("a record whose exit precedes its entry is rejected", "[fcd]") {
  const auto r = parse(fcd_text({"X,2,I9,N,straight,100,160,60,,,", "X,2,I9,N,straight,100,90,-10,,,",
                                 "X,2,I9,N,straight,200,260,60,,,"}));
  CHECK(r.records.size() == 2);
  CHECK(r.rejected == 1);
  REQUIRE(r.reject_reasons.size() == 1);
  CHECK(r.reject_reasons[0].starts_with("line 3"));
}

TEST_CASE("an empty file is an empty dataset", "[fcd]") {
  CHECK(parse("").records.empty());
  CHECK(parse(std::string(kFcdHeader) + "\n").records.empty());
}

TEST_CASE("mostly malformed input is a corrupt dataset", "[fcd]") {
  CHECK_THROWS_AS(parse(fcd_text({"garbage", "X,2,I9,N,straight,100,160,60,,,", "also,garbage"})),
                  CorruptDatasetError);
  CHECK_THROWS_AS(parse("wrong,header\n"), CorruptDatasetError);
}

TEST_CASE("unreadable paths raise I/O errors", "[fcd]") {
  CHECK_THROWS_AS(read_fcd("/nonexistent/dir/fcd.csv"), IoError);
  CHECK_THROWS_AS(write_estimates(std::vector<PhaseEstimate>{}, "/nonexistent/dir/e.jsonl"), IoError);
}

TEST_CASE("adding a malformed line leaves the valid records unchanged", "[fcd][property]") {
  const std::vector<std::string> good = {"X,2,I9,N,straight,100,160,60,30,14,110", "X,2,I9,E,left,200,230,30,,,"};
  const auto base = parse(fcd_text(good));
  for (std::size_t at = 0; at <= good.size(); ++at) {
    auto lines = good;
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(at), "X,2,I9,N,straight,100,90,-10,,,");
    const auto r = parse(fcd_text(lines));
    CHECK(r.records == base.records);
    CHECK(r.rejected == 1);
  }
}

TEST_CASE("FCD write then read is the identity on oracle records", "[fcd][property]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto s = testing::oracle_config(seed);
    s.days = 2;
    s.span_start_s = 7 * 3600;
    s.span_end_s = 8 * 3600;
    s.faults.dropped_stop_fraction = 0.2;
    const auto records = simulate(s).records;
    std::ostringstream out;
    write_fcd(records, out);
    CHECK(parse(out.str()).records == records);
  }
}

TEST_CASE("estimates round-trip through JSON lines", "[fcd][json]") {
  testing::TempDir dir("est");
  std::vector<PhaseEstimate> est;
  for (int i = 0; i < 5; ++i) {
    PhaseEstimate e;
    e.intersection_id = "I" + std::to_string(i);
    e.approach = static_cast<Approach>(i * 3);
    e.movement = static_cast<Movement>(i % 4);
    e.period_start_s = 3600 * i;
    e.period_end_s = 3600 * (i + 1);
    e.cycle_s = 90 + i;
    e.red_s = 40 + i;
    e.green_s = e.cycle_s - e.red_s;
    e.valid = i % 2 == 0;
    e.support_n = 1000 + i;
    e.confidence = 0.1 * i + 1.0 / 3.0;
    e.status = e.valid ? "ok" : "vote_rejected";
    est.push_back(e);
  }
  write_estimates(est, dir / "e.jsonl");
  CHECK(read_estimates(dir / "e.jsonl") == est);

  write_estimates(std::vector<PhaseEstimate>{}, dir / "empty.jsonl");
  CHECK(testing::slurp(dir / "empty.jsonl").empty());
  CHECK(read_estimates(dir / "empty.jsonl").empty());

  PhaseEstimate e;
  e.confidence = 0.913;
  std::ostringstream line;
  write_estimates(std::vector<PhaseEstimate>{e}, line);
  CHECK(line.str().find("0.913") != std::string::npos);
}

TEST_CASE("shortest round-trip number formatting", "[fcd]") {
  for (const double v : {0.0, 0.913, 1.0 / 3.0, -2.5e-7, 1e300, 123456789.125}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.913) == "0.913");
  CHECK(format_double(90.0) == "90");
}

TEST_CASE("weekends are Saturday and Sunday", "[fcd]") {
  CHECK(day_class_of(0) == DayClass::weekday);  // Thursday
  CHECK(day_class_of(2) == DayClass::weekend);  // Saturday
  CHECK(day_class_of(3) == DayClass::weekend);  // Sunday
  CHECK(day_class_of(4) == DayClass::weekday);
  CHECK(day_class_of(19723) == DayClass::weekday);  // 2024-01-01, Monday
  CHECK(day_class_of(-1) == DayClass::weekday);     // Wednesday
}

TEST_CASE("local time with a UTC offset", "[fcd]") {
  const LocalTime t{8 * 3600};
  CHECK(t.day_index(16 * 3600) == 1);
  CHECK(t.clock_s(16 * 3600) == 0);
  CHECK(t.day_start_ts(1) == 16 * 3600);
  CHECK(LocalTime{}.day_index(-1) == -1);
  CHECK(LocalTime{}.clock_s(-1) == 86399);
}

TEST_CASE("stream keys print and parse", "[fcd]") {
  const StreamKey k{"I7", Approach::WNW, Movement::left};
  CHECK(to_string(k) == "I7:WNW:left");
  CHECK(parse_stream_key("I7:WNW:left") == k);
  CHECK_FALSE(parse_stream_key("I7:XX:left"));
  CHECK_FALSE(parse_stream_key(":N:left"));
  CHECK_FALSE(parse_stream_key("I7:N"));
}

TEST_CASE("calibration lookup prefers the most specific row", "[fcd]") {
  CalibrationRow any;
  any.slope_s_per_m = 0.1;
  CalibrationRow city = any;
  city.city = "X";
  city.slope_s_per_m = 0.2;
  CalibrationRow city_hour = city;
  city_hour.hour = 8;
  city_hour.slope_s_per_m = 0.3;
  const CalibrationTable table({any, city, city_hour});
  CHECK(table.lookup("Y", 1, 8).slope_s_per_m == 0.1);
  CHECK(table.lookup("X", 1, 9).slope_s_per_m == 0.2);
  CHECK(table.lookup("X", 1, 8).slope_s_per_m == 0.3);
  CHECK_THROWS_AS(CalibrationTable({city}), DomainError);
  CalibrationRow negative;
  negative.slope_s_per_m = -1;
  CHECK_THROWS_AS(CalibrationTable({negative}), DomainError);
}

TEST_CASE("calibration tables round-trip through CSV", "[fcd]") {
  testing::TempDir dir("cal");
  CalibrationRow a;
  a.slope_s_per_m = 0.25;
  a.intercept_s = 1.5;
  CalibrationRow b;
  b.city = "X";
  b.road_level = 2;
  b.hour = 17;
  b.slope_s_per_m = 0.3;
  const CalibrationTable table({a, b});
  write_calibration(table, dir / "c.csv");
  CHECK(read_calibration(dir / "c.csv").rows() == table.rows());
}

TEST_CASE("plans reject degenerate timing", "[fcd]") {
  CHECK_THROWS_AS(fixed_plan("A", 90, 0), DomainError);
  CHECK_THROWS_AS(fixed_plan("A", 90, 90), DomainError);
  CHECK_THROWS_AS(fixed_plan("A", 700, 300), DomainError);
  auto plan = fixed_plan("A", 90, 50);
  plan.periods[0].end_clock_s = 80000;
  CHECK_THROWS_AS(plan.validate(), DomainError);
  const auto sw = switch_plan("B", 90, 50, 120, 60, 9 * 3600);
  CHECK(sw.period_at(9 * 3600 - 1).cycle_s == 90);
  CHECK(sw.period_at(9 * 3600).cycle_s == 120);
}

TEST_CASE("truth plans round-trip through JSON lines", "[fcd][json]") {
  testing::TempDir dir("truth");
  const std::vector<SignalPlanTruth> plans = {fixed_plan("A", 90, 50), switch_plan("B", 90, 50, 120, 60, 32400),
                                              random_plan("C", 5, true)};
  write_truth(plans, dir / "t.jsonl");
  CHECK(read_truth(dir / "t.jsonl") == plans);
}

TEST_CASE("start events round-trip through CSV", "[fcd]") {
  testing::TempDir dir("ev");
  auto s = testing::oracle_config(3);
  s.days = 3;
  s.span_start_s = 8 * 3600;
  s.span_end_s = 9 * 3600;
  const auto sim = simulate(s);
  const auto events = calibrate(sim.records, oracle_calibration(s));
  REQUIRE_FALSE(events.empty());
  write_events(events, dir / "e.csv");
  CHECK(read_events(dir / "e.csv") == events);
}
