#include "spat/json_io.hpp"

#include <fstream>

#include "spat/error.hpp"

namespace spat {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json failure_json(const std::optional<EstimationFailure>& f) {
  return f ? Json(std::string(to_string(*f))) : Json(nullptr);
}

std::optional<EstimationFailure> failure_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return parse_estimation_failure(j.get<std::string>());
}

Approach approach_from(const Json& j) {
  const auto a = parse_approach(j.get<std::string>());
  if (!a) throw CorruptDatasetError("unknown approach " + j.dump());
  return *a;
}

Movement movement_from(const Json& j) {
  const auto m = parse_movement(j.get<std::string>());
  if (!m) throw CorruptDatasetError("unknown movement " + j.dump());
  return *m;
}

DayClass day_class_from(const Json& j) {
  const auto d = parse_day_class(j.get<std::string>());
  if (!d) throw CorruptDatasetError("unknown day class " + j.dump());
  return *d;
}

StreamKey stream_from(const Json& j) {
  const auto k = parse_stream_key(j.get<std::string>());
  if (!k) throw CorruptDatasetError("bad stream key " + j.dump());
  return *k;
}

Json approach_map(const std::map<Approach, int>& m) {
  Json j = Json::object();
  for (const auto& [a, v] : m) j[std::string(to_string(a))] = v;
  return j;
}

std::map<Approach, int> approach_map_from(const Json& j) {
  std::map<Approach, int> m;
  for (const auto& [k, v] : j.items()) m[approach_from(Json(k))] = v.get<int>();
  return m;
}

template <class T>
void write_lines(std::span<const T> items, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

template <class F>
auto read_lines(const std::filesystem::path& path, F&& parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<decltype(parse(Json{}))> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw CorruptDatasetError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw CorruptDatasetError(path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Json to_json(const WindowEstimate& w) {
  return Json{{"start_s", w.start_s},
              {"support_n", w.support_n},
              {"estimate", w.estimate ? to_json(*w.estimate) : Json(nullptr)},
              {"failure", failure_json(w.failure)}};
}

Json to_json(const SwitchRange& r) {
  return Json{{"start_s", r.start_s},
              {"end_s", r.end_s},
              {"cycle_before", optional_json(r.cycle_before)},
              {"cycle_after", optional_json(r.cycle_after)}};
}

Json to_json(const TodPeriod& p) {
  return Json{{"start_s", p.start_s},
              {"end_s", p.end_s},
              {"cycle_s", p.cycle_s},
              {"max_dispersion_at_split", p.max_dispersion_at_split},
              {"confidence", p.confidence}};
}

Json to_json(const ScoreReport& r) {
  return Json{{"acc3", r.acc3},         {"acc5", r.acc5},         {"recall", r.recall},
              {"n_cases", r.n_cases},   {"n_scored", r.n_scored}, {"residuals", r.residuals}};
}

std::optional<double> optional_double(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

Json to_json(const PhaseEstimate& e) {
  return Json{{"intersection_id", e.intersection_id},
              {"approach", std::string(to_string(e.approach))},
              {"movement", std::string(to_string(e.movement))},
              {"period_start_s", e.period_start_s},
              {"period_end_s", e.period_end_s},
              {"cycle_s", e.cycle_s},
              {"red_s", e.red_s},
              {"green_s", e.green_s},
              {"valid", e.valid},
              {"support_n", e.support_n},
              {"confidence", e.confidence},
              {"status", e.status}};
}

PhaseEstimate phase_estimate_from_json(const Json& j) {
  PhaseEstimate e;
  e.intersection_id = j.at("intersection_id").get<std::string>();
  e.approach = approach_from(j.at("approach"));
  e.movement = movement_from(j.at("movement"));
  e.period_start_s = j.at("period_start_s").get<std::int64_t>();
  e.period_end_s = j.at("period_end_s").get<std::int64_t>();
  e.cycle_s = j.at("cycle_s").get<int>();
  e.red_s = j.at("red_s").get<int>();
  e.green_s = j.at("green_s").get<int>();
  e.valid = j.at("valid").get<bool>();
  e.support_n = j.at("support_n").get<std::int64_t>();
  e.confidence = j.at("confidence").get<double>();
  e.status = j.at("status").get<std::string>();
  return e;
}

Json to_json(const SignalPlanTruth& plan) {
  Json periods = Json::array();
  for (const auto& p : plan.periods) {
    periods.push_back(Json{{"start_clock_s", p.start_clock_s},
                           {"end_clock_s", p.end_clock_s},
                           {"cycle_s", p.cycle_s},
                           {"red_s", approach_map(p.red_s)}});
  }
  return Json{{"intersection_id", plan.intersection_id}, {"periods", periods}, {"offset_s", approach_map(plan.offset_s)}};
}

SignalPlanTruth plan_from_json(const Json& j) {
  SignalPlanTruth plan;
  plan.intersection_id = j.at("intersection_id").get<std::string>();
  for (const auto& p : j.at("periods")) {
    plan.periods.push_back({p.at("start_clock_s").get<std::int64_t>(), p.at("end_clock_s").get<std::int64_t>(),
                            p.at("cycle_s").get<int>(), approach_map_from(p.at("red_s"))});
  }
  plan.offset_s = approach_map_from(j.at("offset_s"));
  return plan;
}

Json to_json(const CycleEstimate& e) {
  const auto cand = [](const CycleCandidate& c) {
    return Json{{"cycle_s", c.cycle_s}, {"fft_magnitude", c.fft_magnitude}, {"ks_d", c.ks_d}};
  };
  Json list = Json::array();
  for (const auto& c : e.candidates) list.push_back(cand(c));
  return Json{{"best", cand(e.best)}, {"candidates", list}, {"support_n", e.support_n}};
}

CycleEstimate cycle_estimate_from_json(const Json& j) {
  const auto cand = [](const Json& c) {
    return CycleCandidate{c.at("cycle_s").get<double>(), c.at("fft_magnitude").get<double>(), c.at("ks_d").get<double>()};
  };
  CycleEstimate e;
  e.best = cand(j.at("best"));
  for (const auto& c : j.at("candidates")) e.candidates.push_back(cand(c));
  e.support_n = j.at("support_n").get<std::size_t>();
  return e;
}

Json to_json(const StreamCycles& c) {
  Json j{{"stream", to_string(c.key)}, {"day_class", std::string(to_string(c.day_class))}};
  Json windows = Json::array(), ranges = Json::array();
  if (c.scan) {
    for (const auto& w : c.scan->windows) windows.push_back(to_json(w));
    for (const auto& r : c.scan->candidate_ranges) ranges.push_back(to_json(r));
  }
  j["windows"] = c.scan ? windows : Json(nullptr);
  j["candidate_ranges"] = c.scan ? ranges : Json(nullptr);
  j["failure"] = failure_json(c.failure);
  j["detail"] = c.detail;
  return j;
}

StreamCycles stream_cycles_from_json(const Json& j) {
  StreamCycles c;
  c.key = stream_from(j.at("stream"));
  c.day_class = day_class_from(j.at("day_class"));
  if (!j.at("windows").is_null()) {
    CoarseScan scan;
    for (const auto& w : j.at("windows")) {
      WindowEstimate we;
      we.start_s = w.at("start_s").get<std::int64_t>();
      we.support_n = w.at("support_n").get<std::size_t>();
      if (!w.at("estimate").is_null()) we.estimate = cycle_estimate_from_json(w.at("estimate"));
      we.failure = failure_from(w.at("failure"));
      scan.windows.push_back(std::move(we));
    }
    for (const auto& r : j.at("candidate_ranges")) {
      scan.candidate_ranges.push_back({r.at("start_s").get<std::int64_t>(), r.at("end_s").get<std::int64_t>(),
                                       optional_double(r.at("cycle_before")), optional_double(r.at("cycle_after"))});
    }
    c.scan = std::move(scan);
  }
  c.failure = failure_from(j.at("failure"));
  c.detail = j.at("detail").get<std::string>();
  return c;
}

Json to_json(const StreamSchedule& s) {
  Json j{{"stream", to_string(s.key)}, {"day_class", std::string(to_string(s.day_class))}};
  if (s.schedule) {
    Json periods = Json::array();
    for (const auto& p : s.schedule->periods) periods.push_back(to_json(p));
    j["periods"] = periods;
  } else {
    j["periods"] = nullptr;
  }
  j["failure"] = failure_json(s.failure);
  j["detail"] = s.detail;
  return j;
}

StreamSchedule stream_schedule_from_json(const Json& j) {
  StreamSchedule s;
  s.key = stream_from(j.at("stream"));
  s.day_class = day_class_from(j.at("day_class"));
  if (!j.at("periods").is_null()) {
    TodSchedule sched;
    for (const auto& p : j.at("periods")) {
      sched.periods.push_back({p.at("start_s").get<std::int64_t>(), p.at("end_s").get<std::int64_t>(),
                               p.at("cycle_s").get<double>(), p.at("max_dispersion_at_split").get<double>(),
                               p.at("confidence").get<double>()});
    }
    s.schedule = std::move(sched);
  }
  s.failure = failure_from(j.at("failure"));
  s.detail = j.at("detail").get<std::string>();
  return s;
}

Json to_json(const EvaluationReport& r) { return Json{{"cycle", to_json(r.cycle)}, {"red", to_json(r.red)}}; }

void write_cycles(std::span<const StreamCycles> cycles, const std::filesystem::path& path) {
  write_lines(cycles, path);
}

std::vector<StreamCycles> read_cycles(const std::filesystem::path& path) {
  return read_lines(path, stream_cycles_from_json);
}

void write_schedules(std::span<const StreamSchedule> schedules, const std::filesystem::path& path) {
  write_lines(schedules, path);
}

std::vector<StreamSchedule> read_schedules(const std::filesystem::path& path) {
  return read_lines(path, stream_schedule_from_json);
}

void write_estimates(std::span<const PhaseEstimate> estimates, std::ostream& out) {
  for (const auto& e : estimates) out << to_json(e).dump() << '\n';
}

void write_estimates(std::span<const PhaseEstimate> estimates, const std::filesystem::path& path) {
  write_lines(estimates, path);
}

std::vector<PhaseEstimate> read_estimates(const std::filesystem::path& path) {
  return read_lines(path, phase_estimate_from_json);
}

void write_truth(std::span<const SignalPlanTruth> plans, const std::filesystem::path& path) { write_lines(plans, path); }

std::vector<SignalPlanTruth> read_truth(const std::filesystem::path& path) {
  auto plans = read_lines(path, plan_from_json);
  for (const auto& p : plans) p.validate();
  return plans;
}

}  // namespace spat
