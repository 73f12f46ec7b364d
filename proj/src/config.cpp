#include "spat/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "spat/error.hpp"

namespace spat {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

struct Setting {
  std::string_view key;
  std::function<void(EstimatorConfig&, std::string_view, std::string_view)> set;
  std::function<std::string(const EstimatorConfig&)> get;
};

template <class T, class Field>
Setting number(std::string_view key, Field field) {
  return {key,
          [field](EstimatorConfig& c, std::string_view k, std::string_view v) { field(c) = parse_value<T>(k, v); },
          [field](const EstimatorConfig& c) {
            const T v = field(const_cast<EstimatorConfig&>(c));
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(v);
            } else {
              return std::to_string(v);
            }
          }};
}

template <class Field>
Setting clock(std::string_view key, Field field) {
  return {key, [field](EstimatorConfig& c, std::string_view, std::string_view v) { field(c) = parse_clock(v); },
          [field](const EstimatorConfig& c) { return format_clock(field(const_cast<EstimatorConfig&>(c))); }};
}

const std::vector<Setting>& settings() {
  using C = EstimatorConfig;
  static const std::vector<Setting> table = {
      number<double>("clean.max_travel_s", [](C& c) -> double& { return c.clean.max_travel_s; }),
      number<double>("clean.max_speed_mps", [](C& c) -> double& { return c.clean.max_speed_mps; }),
      number<double>("clean.max_wait_s", [](C& c) -> double& { return c.clean.max_wait_s; }),
      number<double>("clean.max_dist_m", [](C& c) -> double& { return c.clean.max_dist_m; }),
      number<double>("clean.approach_length_m", [](C& c) -> double& { return c.clean.approach_length_m; }),
      number<std::size_t>("superpose.min_events", [](C& c) -> std::size_t& { return c.superpose.min_events; }),
      number<int>("cycle.k_candidates", [](C& c) -> int& { return c.cycle.k_candidates; }),
      number<double>("cycle.min_cycle_s", [](C& c) -> double& { return c.cycle.min_cycle_s; }),
      number<double>("cycle.c_max_s", [](C& c) -> double& { return c.cycle.c_max_s; }),
      number<double>("cycle.min_ks", [](C& c) -> double& { return c.cycle.min_ks; }),
      number<std::int64_t>("tod.coarse_window_s", [](C& c) -> std::int64_t& { return c.tod.coarse_window_s; }),
      number<std::int64_t>("tod.coarse_step_s", [](C& c) -> std::int64_t& { return c.tod.coarse_step_s; }),
      number<std::int64_t>("tod.fine_window_s", [](C& c) -> std::int64_t& { return c.tod.fine_window_s; }),
      number<std::int64_t>("tod.fine_step_s", [](C& c) -> std::int64_t& { return c.tod.fine_step_s; }),
      number<double>("tod.penalty_w", [](C& c) -> double& { return c.tod.penalty_w; }),
      number<double>("tod.c_max_s", [](C& c) -> double& { return c.tod.c_max_s; }),
      clock("tod.night_start", [](C& c) -> std::int64_t& { return c.tod.night_start_s; }),
      clock("tod.night_end", [](C& c) -> std::int64_t& { return c.tod.night_end_s; }),
      number<double>("tod.same_cycle_tol_s", [](C& c) -> double& { return c.tod.same_cycle_tol_s; }),
      number<double>("dur.alpha", [](C& c) -> double& { return c.dur.alpha; }),
      number<int>("dur.grad_window", [](C& c) -> int& { return c.dur.grad_window; }),
      number<int>("dur.exclusion_W", [](C& c) -> int& { return c.dur.exclusion_W; }),
      number<int>("dur.min_segment", [](C& c) -> int& { return c.dur.min_segment; }),
      number<std::int64_t>("dur.window_s", [](C& c) -> std::int64_t& { return c.dur.window_s; }),
      number<std::int64_t>("eval.slice_s", [](C& c) -> std::int64_t& { return c.eval.slice_s; }),
      clock("eval.from", [](C& c) -> std::int64_t& { return c.eval.from_s; }),
      clock("eval.to", [](C& c) -> std::int64_t& { return c.eval.to_s; }),
      number<std::int64_t>("time.utc_offset_s", [](C& c) -> std::int64_t& { return c.time.utc_offset_s; }),
  };
  return table;
}

}  // namespace

void validate_config(const EstimatorConfig& c) {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.cycle.k_candidates > 0, "cycle.k_candidates must be positive");
  require(c.cycle.min_cycle_s > 0 && c.cycle.min_cycle_s < c.cycle.c_max_s, "cycle.min_cycle_s must be in (0, c_max_s)");
  require(c.tod.coarse_step_s > 0 && c.tod.fine_step_s > 0, "tod step sizes must be positive");
  require(c.tod.coarse_window_s > 0 && c.tod.fine_window_s > 0, "tod window sizes must be positive");
  require(c.tod.c_max_s > 0 && c.tod.penalty_w >= 0, "tod.c_max_s > 0 and tod.penalty_w >= 0 required");
  require(c.dur.alpha > 0 && c.dur.grad_window >= 1, "dur.alpha > 0 and dur.grad_window >= 1 required");
  require(c.dur.exclusion_W >= 0 && c.dur.min_segment >= 2, "dur.exclusion_W >= 0 and dur.min_segment >= 2 required");
  require(c.dur.window_s > 0, "dur.window_s must be positive");
  require(c.eval.slice_s > 0 && c.eval.from_s < c.eval.to_s, "eval slice settings are inconsistent");
}

std::int64_t parse_clock(std::string_view text) {
  int h = 0, m = 0, s = 0, used = -1;
  const std::string buf(trim(text));
  if (std::sscanf(buf.c_str(), "%d:%d:%d%n", &h, &m, &s, &used) != 3) {
    s = 0;
    used = -1;
    std::sscanf(buf.c_str(), "%d:%d%n", &h, &m, &used);
  }
  if (used != static_cast<int>(buf.size()) || h < 0 || h > 24 || m < 0 || m > 59 || s < 0 || s > 59 || (h == 24 && (m || s))) {
    throw ConfigError("bad clock time '" + buf + "', expected HH:MM[:SS]");
  }
  return h * kSecondsPerHour + m * 60 + s;
}

std::string format_clock(std::int64_t clock_s) {
  char buf[64];
  const auto h = clock_s / 3600, m = (clock_s / 60) % 60, s = clock_s % 60;
  if (s == 0) {
    std::snprintf(buf, sizeof buf, "%02lld:%02lld", static_cast<long long>(h), static_cast<long long>(m));
  } else {
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(h), static_cast<long long>(m),
                  static_cast<long long>(s));
  }
  return buf;
}

std::map<std::string, std::string> parse_flat_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find_first_of("#;"); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": unterminated section");
      section = std::string(trim(text.substr(1, text.size() - 2)));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(text.substr(0, eq)));
    auto value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (!section.empty()) key = section + "." + key;
    out[key] = std::string(value);
  }
  return out;
}

void apply_setting(EstimatorConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& s : settings()) {
    if (s.key == key) {
      s.set(cfg, key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key: " + std::string(key));
}

EstimatorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  EstimatorConfig cfg;
  for (const auto& [key, value] : parse_flat_config(in)) apply_setting(cfg, key, value);
  validate_config(cfg);
  return cfg;
}

std::string dump_config(const EstimatorConfig& cfg) {
  std::ostringstream out;
  for (const auto& s : settings()) out << s.key << " = " << s.get(cfg) << '\n';
  return out.str();
}

}  // namespace spat
