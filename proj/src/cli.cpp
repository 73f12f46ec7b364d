#include "spat/cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spat/error.hpp"
#include "spat/eval.hpp"
#include "spat/json_io.hpp"
#include "spat/pipeline.hpp"
#include "spat/spectrum.hpp"
#include "spat/synth_oracle.hpp"

namespace spat {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  int jobs = 0;
  std::string day_class = "weekday";
  std::string out_dir = ".";
};

struct Context {
  EstimatorConfig cfg;
  DayClass day_class = DayClass::weekday;
  Exec exec = Exec::parallel;
  fs::path out_dir;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::ostream& log() const { return *err; }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Config file (key = value)");
  sub->add_option("--set", c.overrides, "Override a config key, e.g. --set cycle.min_ks=0.1");
  sub->add_option("--jobs", c.jobs, "Worker threads; 0 uses all cores")->check(CLI::NonNegativeNumber);
  sub->add_option("--day-class", c.day_class, "weekday or weekend")->check(CLI::IsMember({"weekday", "weekend"}));
  sub->add_option("--out", c.out_dir, "Output directory");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

Context make_context(const Common& c, std::ostream& out, std::ostream& err) {
  Context ctx;
  if (!c.config_path.empty()) {
    require_file(c.config_path, "--config");
    ctx.cfg = load_config(c.config_path);
  }
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(ctx.cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate_config(ctx.cfg);
  ctx.day_class = *parse_day_class(c.day_class);
  if (c.jobs > 0) omp_set_num_threads(c.jobs);
  ctx.exec = c.jobs == 1 ? Exec::serial : Exec::parallel;
  ctx.out_dir = c.out_dir;
  ctx.out = &out;
  ctx.err = &err;
  return ctx;
}

void ensure_out_dir(const Context& ctx) { fs::create_directories(ctx.out_dir); }

std::size_t count_failures(const std::vector<StreamCycles>& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](const auto& c) { return !c.scan; }));
}

void log_preprocess(const Context& ctx, std::size_t read, std::size_t parse_rejects, const PreprocessResult& pre) {
  ctx.log() << "preprocess: records read " << read << ", malformed " << parse_rejects << ", rejected by cleaning "
            << pre.rejected << ", kept " << pre.kept.size() << ", start events " << pre.events.size() << '\n';
}

void log_cycles(const Context& ctx, const std::vector<StreamCycles>& cycles) {
  std::size_t windows = 0, low = 0, unreliable = 0, ranges = 0;
  for (const auto& c : cycles) {
    if (!c.scan) continue;
    for (const auto& w : c.scan->windows) {
      ++windows;
      if (w.failure == EstimationFailure::low_support) ++low;
      else if (!w.reliable()) ++unreliable;
    }
    ranges += c.scan->candidate_ranges.size();
  }
  ctx.log() << "cycle: streams " << cycles.size() << ", failed " << count_failures(cycles) << ", windows " << windows
            << ", low-support " << low << ", unreliable " << unreliable << ", candidate ranges " << ranges << '\n';
}

void log_schedules(const Context& ctx, const std::vector<StreamSchedule>& schedules) {
  std::size_t failed = 0, periods = 0;
  for (const auto& s : schedules) {
    if (s.schedule) periods += s.schedule->periods.size();
    else ++failed;
  }
  ctx.log() << "tod: streams " << schedules.size() << ", failed " << failed << ", periods " << periods << '\n';
}

void log_estimates(const Context& ctx, const std::vector<PhaseEstimate>& estimates) {
  const auto valid = std::count_if(estimates.begin(), estimates.end(), [](const auto& e) { return e.valid; });
  ctx.log() << "duration: estimates " << estimates.size() << ", confirmed " << valid << ", recalled "
            << estimates.size() - static_cast<std::size_t>(valid) << '\n';
}

FcdReadResult load_fcd(const Context& ctx, const std::string& path) {
  auto fcd = read_fcd(path);
  for (std::size_t i = 0; i < std::min<std::size_t>(fcd.reject_reasons.size(), 5); ++i) {
    ctx.log() << "  " << path << ": " << fcd.reject_reasons[i] << '\n';
  }
  return fcd;
}

// --- subcommands ---

struct SynthArgs {
  int intersections = 1;
  int days = 20;
  std::uint64_t seed = 1;
  double penetration = 0.1;
  double rate = 600.0;
  double jitter = 1.5;
  double long_parkers = 0.1;
  bool with_switch = false;
  int cycle = 0;
  int red = 0;
};

int cmd_synth(const Context& ctx, const SynthArgs& a) {
  if ((a.cycle > 0) != (a.red > 0)) throw UsageError("--cycle and --red go together");
  ensure_out_dir(ctx);
  std::vector<TrajectoryRecord> records;
  std::vector<SignalPlanTruth> plans;
  SimConfig sim;
  for (int i = 0; i < a.intersections; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "I%03d", i + 1);
    const auto seed = a.seed * 1000003ULL + static_cast<std::uint64_t>(i);
    sim.plan = a.cycle > 0 ? fixed_plan(id, a.cycle, a.red) : random_plan(id, seed, a.with_switch);
    sim.arrival_rate_vph = a.rate;
    sim.penetration = a.penetration;
    sim.start_jitter_sd_s = a.jitter;
    sim.days = a.days;
    sim.seed = seed;
    sim.day_class = ctx.day_class;
    sim.time = ctx.cfg.time;
    sim.faults.long_parker_fraction = a.long_parkers;
    auto result = simulate(sim);
    records.insert(records.end(), result.records.begin(), result.records.end());
    plans.push_back(result.truth);
  }
  write_fcd(records, ctx.out_dir / "fcd.csv");
  write_truth(plans, ctx.out_dir / "truth.jsonl");
  write_calibration(oracle_calibration(sim), ctx.out_dir / "calibration.csv");
  ctx.log() << "synth: intersections " << plans.size() << ", records " << records.size() << '\n';
  return 0;
}

CalibrationTable load_table(const std::string& path) {
  return path.empty() ? CalibrationTable::neutral() : read_calibration(path);
}

int cmd_preprocess(const Context& ctx, const std::string& fcd_path, const std::string& cal_path) {
  ensure_out_dir(ctx);
  const auto fcd = load_fcd(ctx, fcd_path);
  const auto pre = preprocess(fcd.records, load_table(cal_path), ctx.cfg);
  log_preprocess(ctx, fcd.records.size() + fcd.rejected, fcd.rejected, pre);
  write_fcd(pre.kept, ctx.out_dir / "clean.csv");
  write_events(pre.events, ctx.out_dir / "events.csv");
  return 0;
}

int cmd_cycle(const Context& ctx, const std::string& events_path) {
  ensure_out_dir(ctx);
  const auto events = read_events(events_path);
  const auto cycles = run_cycle_stage(events, ctx.day_class, ctx.cfg, ctx.exec);
  log_cycles(ctx, cycles);
  write_cycles(cycles, ctx.out_dir / "cycles.jsonl");
  return 0;
}

int cmd_tod(const Context& ctx, const std::string& events_path, const std::string& cycles_path) {
  ensure_out_dir(ctx);
  const auto events = read_events(events_path);
  const auto cycles = read_cycles(cycles_path);
  const auto schedules = run_tod_stage(events, cycles, ctx.cfg, ctx.exec);
  log_schedules(ctx, schedules);
  write_schedules(schedules, ctx.out_dir / "schedules.jsonl");
  return 0;
}

int cmd_duration(const Context& ctx, const std::string& fcd_path, const std::string& events_path,
                 const std::string& schedules_path) {
  ensure_out_dir(ctx);
  const auto fcd = load_fcd(ctx, fcd_path);
  const auto events = read_events(events_path);
  const auto schedules = read_schedules(schedules_path);
  const auto estimates = run_duration_stage(fcd.records, events, schedules, ctx.cfg, ctx.exec);
  log_estimates(ctx, estimates);
  write_estimates(estimates, ctx.out_dir / "estimates.jsonl");
  return 0;
}

int cmd_pipeline(const Context& ctx, const std::string& fcd_path, const std::string& cal_path) {
  ensure_out_dir(ctx);
  const auto fcd = load_fcd(ctx, fcd_path);
  const auto result = run_pipeline(fcd.records, load_table(cal_path), ctx.day_class, ctx.cfg, ctx.exec);
  log_preprocess(ctx, fcd.records.size() + fcd.rejected, fcd.rejected, result.pre);
  log_cycles(ctx, result.cycles);
  log_schedules(ctx, result.schedules);
  log_estimates(ctx, result.estimates);
  write_fcd(result.pre.kept, ctx.out_dir / "clean.csv");
  write_events(result.pre.events, ctx.out_dir / "events.csv");
  write_cycles(result.cycles, ctx.out_dir / "cycles.jsonl");
  write_schedules(result.schedules, ctx.out_dir / "schedules.jsonl");
  write_estimates(result.estimates, ctx.out_dir / "estimates.jsonl");
  return 0;
}

int cmd_eval(const Context& ctx, const std::string& estimates_path, const std::string& truth_path, bool write_json) {
  const auto estimates = read_estimates(estimates_path);
  const auto truth = read_truth(truth_path);
  const auto report = evaluate(estimates, truth, ctx.cfg.eval);
  *ctx.out << format_report_table(report);
  if (write_json) {
    ensure_out_dir(ctx);
    std::ofstream f(ctx.out_dir / "report.json");
    if (!f) throw IoError("cannot write report.json");
    f << to_json(report).dump(2) << '\n';
  }
  return 0;
}

struct PlotArgs {
  int fig = 7;
  std::string fcd;
  std::string events;
  std::string stream;
  std::string window = "08:00";
  std::int64_t length_s = 3600;
  double cycle = 0.0;
  std::string file;
};

int cmd_plot(const Context& ctx, const PlotArgs& a) {
  const auto events = read_events(a.events);
  if (events.empty()) throw EstimationError(EstimationFailure::empty_input, "no start events");
  StreamKey key = events.front().key();
  if (!a.stream.empty()) {
    const auto parsed = parse_stream_key(a.stream);
    if (!parsed) throw UsageError("--stream expects intersection:approach:movement");
    key = *parsed;
  }
  std::vector<StartEvent> stream_events;
  for (const auto& e : events) {
    if (e.key() == key) stream_events.push_back(e);
  }
  const auto start = parse_clock(a.window);
  const auto window = superpose(stream_events, ctx.day_class, start, ctx.cfg.superpose, ctx.cfg.time, a.length_s);

  std::ostringstream csv;
  const auto cycle_for_window = [&] {
    if (a.cycle > 0) return a.cycle;
    const auto est = select_cycle(window, ctx.cfg.cycle);
    ctx.log() << "plot: window cycle " << format_double(est.best.cycle_s) << " s (KS " << format_double(est.best.ks_d)
              << ")\n";
    return est.best.cycle_s;
  };

  if (a.fig == 2) {
    csv << "day_index,clock_s,rel_time_s\n";
    for (const auto& e : window.events) {
      csv << e.day_index << ',' << start + e.rel_time_s + window.per_day_offset_s.at(e.day_index) << ','
          << e.rel_time_s << '\n';
    }
  } else if (a.fig == 3) {
    const auto series = build_series(window);
    const auto mag = magnitude_spectrum(series.counts);
    const auto est = select_cycle(window, ctx.cfg.cycle);
    csv << "period_s,magnitude,ks_d\n";
    const double n = static_cast<double>(series.counts.size());
    for (std::size_t m = mag.size() - 1; m >= 1; --m) {
      const double period = n / static_cast<double>(m);
      if (period < ctx.cfg.cycle.min_cycle_s || period > ctx.cfg.cycle.c_max_s) continue;
      csv << format_double(period) << ',' << format_double(mag[m]) << ',';
      for (const auto& c : est.candidates) {
        if (c.cycle_s == period) csv << format_double(c.ks_d);
      }
      csv << '\n';
    }
  } else {
    if (a.fcd.empty()) throw UsageError("--fcd is required for figures 6 and 7");
    const auto records = load_fcd(ctx, a.fcd).records;
    const int cycle = static_cast<int>(std::lround(cycle_for_window()));
    std::vector<double> waits;
    for (const auto& r : records) {
      if (r.key() == key && r.stop && day_class_of(ctx.cfg.time.day_index(r.stop->stop_ts)) == ctx.day_class) {
        const auto clock = ctx.cfg.time.clock_s(r.stop->stop_ts);
        if (clock >= start && clock < start + a.length_s) waits.push_back(static_cast<double>(r.stop->wait_s));
      }
    }
    const auto analysis = analyze_waits(waits, cycle, ctx.cfg.dur);
    ctx.log() << "plot: red " << analysis.red_s << " s, inflection index " << analysis.i_star << '\n';
    if (a.fig == 6) {
      csv << "index,wait_s,fit_low,fit_high\n";
      for (std::size_t i = 0; i < analysis.sorted_waits.size(); ++i) {
        const double x = static_cast<double>(i);
        csv << i << ',' << format_double(analysis.sorted_waits[i]) << ','
            << format_double(analysis.fit.a_low * x + analysis.fit.b_low) << ','
            << format_double(analysis.fit.a_high * x + analysis.fit.b_high) << '\n';
      }
    } else {
      const auto samples = overlay_samples(records, stream_events, key, ctx.day_class, start, start + a.length_s,
                                           ctx.cfg.time);
      const auto overlay = build_overlay(samples, cycle, ctx.cfg.time);
      const auto vote = vote_confirm(overlay, cycle, analysis.red_s);
      ctx.log() << "plot: confirmation interval [" << vote.lo << ", " << vote.hi << "], red onset "
                << cycle - analysis.red_s << ", " << (vote.valid ? "confirmed" : "recalled") << '\n';
      csv << "second,cross_freq,wait_count\n";
      for (int s = 0; s < cycle; ++s) {
        csv << s << ',' << format_double(overlay.cross_freq[s]) << ',' << format_double(overlay.wait_count[s]) << '\n';
      }
    }
  }

  if (a.file.empty()) {
    *ctx.out << csv.str();
  } else {
    ensure_out_dir(ctx);
    std::ofstream f(ctx.out_dir / a.file);
    if (!f) throw IoError("cannot write " + (ctx.out_dir / a.file).string());
    f << csv.str();
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Signal timing estimation from floating-car data", "spat"};
  app.require_subcommand(1);
  Common common;

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic trajectories with a known plan");
  add_common(synth_cmd, common);
  synth_cmd->add_option("--intersections", synth.intersections)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--days", synth.days)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--penetration", synth.penetration)->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--rate", synth.rate, "Arrivals per hour per approach")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--jitter", synth.jitter, "Start-time jitter sd, seconds")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--long-parkers", synth.long_parkers)->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_flag("--switch", synth.with_switch, "Give each plan a morning cycle change");
  synth_cmd->add_option("--cycle", synth.cycle, "Fixed cycle for every intersection");
  synth_cmd->add_option("--red", synth.red, "Fixed N/S red with --cycle");

  std::string fcd_path, cal_path, events_path, cycles_path, schedules_path, estimates_path, truth_path;
  auto* pre_cmd = app.add_subcommand("preprocess", "Clean records and calibrate start events");
  add_common(pre_cmd, common);
  pre_cmd->add_option("--fcd", fcd_path)->required();
  pre_cmd->add_option("--calibration", cal_path);

  auto* cycle_cmd = app.add_subcommand("cycle", "Coarse cycle scan per stream");
  add_common(cycle_cmd, common);
  cycle_cmd->add_option("--events", events_path)->required();

  auto* tod_cmd = app.add_subcommand("tod", "Time-of-day schedule per stream");
  add_common(tod_cmd, common);
  tod_cmd->add_option("--events", events_path)->required();
  tod_cmd->add_option("--cycles", cycles_path)->required();

  auto* dur_cmd = app.add_subcommand("duration", "Red duration and vote per schedule period");
  add_common(dur_cmd, common);
  dur_cmd->add_option("--fcd", fcd_path, "Cleaned records")->required();
  dur_cmd->add_option("--events", events_path)->required();
  dur_cmd->add_option("--schedules", schedules_path)->required();

  auto* pipe_cmd = app.add_subcommand("pipeline", "All stages end to end");
  add_common(pipe_cmd, common);
  pipe_cmd->add_option("--fcd", fcd_path)->required();
  pipe_cmd->add_option("--calibration", cal_path);

  bool eval_json = false;
  auto* eval_cmd = app.add_subcommand("eval", "Score estimates against a truth sidecar");
  add_common(eval_cmd, common);
  eval_cmd->add_option("--estimates", estimates_path)->required();
  eval_cmd->add_option("--truth", truth_path)->required();
  eval_cmd->add_flag("--json", eval_json, "Also write report.json to --out");

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Emit figure data as CSV");
  add_common(plot_cmd, common);
  plot_cmd->add_option("--fig", plot.fig)->check(CLI::IsMember({2, 3, 6, 7}))->required();
  plot_cmd->add_option("--events", plot.events)->required();
  plot_cmd->add_option("--fcd", plot.fcd, "Records, for figures 6 and 7");
  plot_cmd->add_option("--stream", plot.stream, "intersection:approach:movement; default first stream");
  plot_cmd->add_option("--window", plot.window, "Window start HH:MM");
  plot_cmd->add_option("--length", plot.length_s, "Window length, seconds")->check(CLI::PositiveNumber);
  plot_cmd->add_option("--cycle", plot.cycle, "Use this cycle instead of estimating it");
  plot_cmd->add_option("--file", plot.file, "Write to this file under --out instead of stdout");

  std::vector<const char*> argv{"spat"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto ctx = make_context(common, out, err);
    if (synth_cmd->parsed()) return cmd_synth(ctx, synth);
    if (pre_cmd->parsed()) {
      require_file(fcd_path, "--fcd");
      if (!cal_path.empty()) require_file(cal_path, "--calibration");
      return cmd_preprocess(ctx, fcd_path, cal_path);
    }
    if (cycle_cmd->parsed()) {
      require_file(events_path, "--events");
      return cmd_cycle(ctx, events_path);
    }
    if (tod_cmd->parsed()) {
      require_file(events_path, "--events");
      require_file(cycles_path, "--cycles");
      return cmd_tod(ctx, events_path, cycles_path);
    }
    if (dur_cmd->parsed()) {
      require_file(fcd_path, "--fcd");
      require_file(events_path, "--events");
      require_file(schedules_path, "--schedules");
      return cmd_duration(ctx, fcd_path, events_path, schedules_path);
    }
    if (pipe_cmd->parsed()) {
      require_file(fcd_path, "--fcd");
      if (!cal_path.empty()) require_file(cal_path, "--calibration");
      return cmd_pipeline(ctx, fcd_path, cal_path);
    }
    if (eval_cmd->parsed()) {
      require_file(estimates_path, "--estimates");
      require_file(truth_path, "--truth");
      return cmd_eval(ctx, estimates_path, truth_path, eval_json);
    }
    if (plot_cmd->parsed()) {
      require_file(plot.events, "--events");
      if (!plot.fcd.empty()) require_file(plot.fcd, "--fcd");
      return cmd_plot(ctx, plot);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const EstimationError& e) {
    err << "estimation failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace spat
