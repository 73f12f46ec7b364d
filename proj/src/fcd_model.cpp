#include "spat/fcd_model.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <variant>

#include "spat/error.hpp"

namespace spat {

namespace {

constexpr std::array<std::string_view, 16> kApproachNames{
    "N", "NNE", "NE", "ENE", "E", "ESE", "SE", "SSE", "S", "SSW", "SW", "WSW", "W", "WNW", "NW", "NNW"};
constexpr std::array<std::string_view, 4> kMovementNames{"left", "straight", "right", "u_turn"};
constexpr std::array<std::string_view, 2> kDayClassNames{"weekday", "weekend"};

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

std::string_view trim_eol(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
  return line;
}

template <class T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

void check_text_field(std::string_view value, std::string_view what) {
  if (value.find_first_of(",\n\r") != std::string_view::npos) {
    throw DomainError(std::string(what) + " contains a separator character: " + std::string(value));
  }
}

std::variant<TrajectoryRecord, std::string> parse_fcd_line(std::string_view line) {
  const auto f = split_fields(line);
  if (f.size() != 11) return "expected 11 fields, got " + std::to_string(f.size());
  TrajectoryRecord r;
  r.city = std::string(f[0]);
  const auto level = parse_number<int>(f[1]);
  if (!level) return std::string("bad road_level");
  r.road_level = *level;
  if (f[2].empty()) return std::string("empty intersection_id");
  r.intersection_id = std::string(f[2]);
  const auto approach = parse_approach(f[3]);
  if (!approach) return "bad approach '" + std::string(f[3]) + "'";
  r.approach = *approach;
  const auto movement = parse_movement(f[4]);
  if (!movement) return "bad movement '" + std::string(f[4]) + "'";
  r.movement = *movement;
  const auto entry = parse_number<std::int64_t>(f[5]);
  const auto exit = parse_number<std::int64_t>(f[6]);
  const auto travel = parse_number<std::int64_t>(f[7]);
  if (!entry || !exit || !travel) return std::string("bad timestamp field");
  r.entry_ts = *entry;
  r.exit_ts = *exit;
  r.travel_time = *travel;
  const bool any_stop = !f[8].empty() || !f[9].empty() || !f[10].empty();
  if (any_stop) {
    const auto wait = parse_number<std::int64_t>(f[8]);
    const auto dist = parse_number<double>(f[9]);
    const auto stop_ts = parse_number<std::int64_t>(f[10]);
    if (!wait || !dist || !stop_ts) return std::string("incomplete stop detail");
    r.stop = StopDetail{*wait, *dist, *stop_ts};
  }
  if (auto why = invariant_violation(r)) return *why;
  return r;
}

}  // namespace

std::string_view to_string(Approach a) { return kApproachNames[static_cast<std::size_t>(a)]; }
std::string_view to_string(Movement m) { return kMovementNames[static_cast<std::size_t>(m)]; }
std::string_view to_string(DayClass d) { return kDayClassNames[static_cast<std::size_t>(d)]; }

std::optional<Approach> parse_approach(std::string_view text) {
  for (std::size_t i = 0; i < kApproachNames.size(); ++i) {
    if (kApproachNames[i] == text) return static_cast<Approach>(i);
  }
  return std::nullopt;
}

std::optional<Movement> parse_movement(std::string_view text) {
  for (std::size_t i = 0; i < kMovementNames.size(); ++i) {
    if (kMovementNames[i] == text) return static_cast<Movement>(i);
  }
  return std::nullopt;
}

std::optional<DayClass> parse_day_class(std::string_view text) {
  for (std::size_t i = 0; i < kDayClassNames.size(); ++i) {
    if (kDayClassNames[i] == text) return static_cast<DayClass>(i);
  }
  return std::nullopt;
}

std::int64_t LocalTime::day_index(std::int64_t ts) const { return floor_div(ts + utc_offset_s, kSecondsPerDay); }

std::int64_t LocalTime::clock_s(std::int64_t ts) const {
  return ts + utc_offset_s - day_index(ts) * kSecondsPerDay;
}

std::int64_t LocalTime::day_start_ts(std::int64_t day) const { return day * kSecondsPerDay - utc_offset_s; }

DayClass day_class_of(std::int64_t day_index) {
  // 0 = Sunday.
  const auto weekday = ((day_index + 4) % 7 + 7) % 7;
  return (weekday == 0 || weekday == 6) ? DayClass::weekend : DayClass::weekday;
}

std::string to_string(const StreamKey& key) {
  return key.intersection_id + ":" + std::string(to_string(key.approach)) + ":" +
         std::string(to_string(key.movement));
}

std::optional<StreamKey> parse_stream_key(std::string_view text) {
  const auto a = text.find(':');
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = text.find(':', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  const auto approach = parse_approach(text.substr(a + 1, b - a - 1));
  const auto movement = parse_movement(text.substr(b + 1));
  if (!approach || !movement || a == 0) return std::nullopt;
  return StreamKey{std::string(text.substr(0, a)), *approach, *movement};
}

std::optional<std::string> invariant_violation(const TrajectoryRecord& r) {
  if (r.entry_ts > r.exit_ts) return "exit_ts precedes entry_ts";
  if (r.travel_time != r.exit_ts - r.entry_ts) return "travel_time != exit_ts - entry_ts";
  if (r.stop) {
    const auto& s = *r.stop;
    if (s.stop_ts < r.entry_ts || s.stop_ts > r.exit_ts) return "stop_ts outside [entry_ts, exit_ts]";
    if (s.wait_s < 0) return "negative wait_s";
    if (!(s.dist_to_stopline_m >= 0.0)) return "negative dist_to_stopline_m";
  }
  return std::nullopt;
}

CalibrationTable::CalibrationTable(std::vector<CalibrationRow> rows) : rows_(std::move(rows)) {
  bool has_default = false;
  for (const auto& row : rows_) {
    if (!(row.slope_s_per_m >= 0.0)) throw DomainError("calibration slope must be >= 0");
    if (row.hour && (*row.hour < 0 || *row.hour > 23)) throw DomainError("calibration hour must be in 0..23");
    has_default = has_default || (!row.city && !row.road_level && !row.hour);
  }
  if (!has_default) throw DomainError("calibration table needs a wildcard default row '*,*,*'");
}

CalibrationTable CalibrationTable::neutral() { return CalibrationTable({CalibrationRow{}}); }

CalibrationTable::Coefficients CalibrationTable::lookup(std::string_view city, int road_level, int hour) const {
  const CalibrationRow* best = nullptr;
  int best_score = -1;
  for (const auto& row : rows_) {
    if (row.city && *row.city != city) continue;
    if (row.road_level && *row.road_level != road_level) continue;
    if (row.hour && *row.hour != hour) continue;
    const int score = (row.city ? 4 : 0) + (row.road_level ? 2 : 0) + (row.hour ? 1 : 0);
    if (score > best_score) {
      best = &row;
      best_score = score;
    }
  }
  // The constructor guarantees a wildcard row, so `best` is never null.
  return {best->slope_s_per_m, best->intercept_s};
}

void SignalPlanTruth::validate() const {
  if (periods.empty()) throw DomainError("plan " + intersection_id + " has no periods");
  std::int64_t expected_start = 0;
  for (const auto& p : periods) {
    if (p.start_clock_s != expected_start) throw DomainError("plan periods must tile the day without gaps or overlap");
    if (p.end_clock_s <= p.start_clock_s) throw DomainError("plan period has non-positive length");
    if (p.cycle_s <= 0 || p.cycle_s > kMaxCycleS) throw DomainError("plan cycle must be in (0, 600]");
    if (p.red_s.empty()) throw DomainError("plan period has no approaches");
    for (const auto& [approach, red] : p.red_s) {
      if (red <= 0 || red >= p.cycle_s) {
        throw DomainError("red for approach " + std::string(to_string(approach)) + " must satisfy 0 < red < cycle");
      }
    }
    expected_start = p.end_clock_s;
  }
  if (expected_start != kSecondsPerDay) throw DomainError("plan periods must end at 86400");
}

const PlanPeriod& SignalPlanTruth::period_at(std::int64_t clock_s) const {
  for (const auto& p : periods) {
    if (clock_s >= p.start_clock_s && clock_s < p.end_clock_s) return p;
  }
  throw DomainError("clock time outside plan: " + std::to_string(clock_s));
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

FcdReadResult parse_fcd(std::istream& in) {
  FcdReadResult result;
  std::string line;
  std::size_t line_no = 0;
  std::size_t data_lines = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_eol(line);
    if (!header_seen) {
      if (text.empty()) continue;
      if (text != kFcdHeader) throw CorruptDatasetError("FCD file does not start with the expected header");
      header_seen = true;
      continue;
    }
    if (text.empty()) continue;
    ++data_lines;
    auto parsed = parse_fcd_line(text);
    if (auto* rec = std::get_if<TrajectoryRecord>(&parsed)) {
      result.records.push_back(std::move(*rec));
    } else {
      ++result.rejected;
      result.reject_reasons.push_back("line " + std::to_string(line_no) + ": " + std::get<std::string>(parsed));
    }
  }
  if (data_lines > 0 && 2 * result.rejected > data_lines) {
    throw CorruptDatasetError(std::to_string(result.rejected) + " of " + std::to_string(data_lines) +
                              " FCD lines are malformed");
  }
  return result;
}

FcdReadResult read_fcd(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return parse_fcd(in);
}

void write_fcd(std::span<const TrajectoryRecord> records, std::ostream& out) {
  out << kFcdHeader << '\n';
  for (const auto& r : records) {
    check_text_field(r.city, "city");
    check_text_field(r.intersection_id, "intersection_id");
    out << r.city << ',' << r.road_level << ',' << r.intersection_id << ',' << to_string(r.approach) << ','
        << to_string(r.movement) << ',' << r.entry_ts << ',' << r.exit_ts << ',' << r.travel_time << ',';
    if (r.stop) {
      out << r.stop->wait_s << ',' << format_double(r.stop->dist_to_stopline_m) << ',' << r.stop->stop_ts;
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void write_fcd(std::span<const TrajectoryRecord> records, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_fcd(records, out);
  if (!out) throw IoError("write failed: " + path.string());
}

CalibrationTable read_calibration(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::string line;
  std::vector<CalibrationRow> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_eol(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != kCalibrationHeader) throw CorruptDatasetError("calibration file lacks the expected header");
      header_seen = true;
      continue;
    }
    const auto f = split_fields(text);
    const auto fail = [&](const std::string& why) {
      return CorruptDatasetError("calibration line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() != 5) throw fail("expected 5 fields");
    CalibrationRow row;
    if (f[0] != "*") row.city = std::string(f[0]);
    if (f[1] != "*") {
      row.road_level = parse_number<int>(f[1]);
      if (!row.road_level) throw fail("bad road_level");
    }
    if (f[2] != "*") {
      row.hour = parse_number<int>(f[2]);
      if (!row.hour) throw fail("bad hour");
    }
    const auto slope = parse_number<double>(f[3]);
    const auto intercept = parse_number<double>(f[4]);
    if (!slope || !intercept) throw fail("bad coefficient");
    row.slope_s_per_m = *slope;
    row.intercept_s = *intercept;
    rows.push_back(std::move(row));
  }
  return CalibrationTable(std::move(rows));
}

void write_calibration(const CalibrationTable& table, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kCalibrationHeader << '\n';
  for (const auto& row : table.rows()) {
    out << (row.city ? *row.city : "*") << ',' << (row.road_level ? std::to_string(*row.road_level) : "*") << ','
        << (row.hour ? std::to_string(*row.hour) : "*") << ',' << format_double(row.slope_s_per_m) << ','
        << format_double(row.intercept_s) << '\n';
  }
}

std::vector<StartEvent> read_events(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<StartEvent> events;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim_eol(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != kEventsHeader) throw CorruptDatasetError("events file lacks the expected header");
      header_seen = true;
      continue;
    }
    const auto f = split_fields(text);
    const auto approach = f.size() == 7 ? parse_approach(f[1]) : std::nullopt;
    const auto movement = f.size() == 7 ? parse_movement(f[2]) : std::nullopt;
    const auto raw = f.size() == 7 ? parse_number<std::int64_t>(f[3]) : std::nullopt;
    const auto cal = f.size() == 7 ? parse_number<std::int64_t>(f[4]) : std::nullopt;
    const auto day = f.size() == 7 ? parse_number<std::int64_t>(f[5]) : std::nullopt;
    const auto day_class = f.size() == 7 ? parse_day_class(f[6]) : std::nullopt;
    if (!approach || !movement || !raw || !cal || !day || !day_class) {
      throw CorruptDatasetError("events line " + std::to_string(line_no) + " is malformed");
    }
    events.push_back({std::string(f[0]), *approach, *movement, *raw, *cal, *day, *day_class});
  }
  return events;
}

void write_events(std::span<const StartEvent> events, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kEventsHeader << '\n';
  for (const auto& e : events) {
    out << e.intersection_id << ',' << to_string(e.approach) << ',' << to_string(e.movement) << ',' << e.raw_start_ts
        << ',' << e.calibrated_start_ts << ',' << e.day_index << ',' << to_string(e.day_class) << '\n';
  }
}

}  // namespace spat
