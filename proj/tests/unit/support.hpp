#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "spat/fcd_model.hpp"
#include "spat/preprocess.hpp"
#include "spat/synth_oracle.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("spat_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline spat::TrajectoryRecord stopped_record(std::int64_t stop_ts, std::int64_t wait_s, double dist_m,
                                             spat::Approach a = spat::Approach::N) {
  spat::TrajectoryRecord r;
  r.city = "SYN";
  r.road_level = 3;
  r.intersection_id = "I1";
  r.approach = a;
  r.entry_ts = stop_ts - 10;
  r.exit_ts = stop_ts + wait_s + 5;
  r.travel_time = r.exit_ts - r.entry_ts;
  r.stop = spat::StopDetail{wait_s, dist_m, stop_ts};
  return r;
}

inline spat::StartEvent start_event(std::int64_t day, std::int64_t clock_s, spat::Approach a = spat::Approach::N) {
  spat::StartEvent e;
  e.intersection_id = "I1";
  e.approach = a;
  e.raw_start_ts = day * spat::kSecondsPerDay + clock_s;
  e.calibrated_start_ts = e.raw_start_ts;
  e.day_index = day;
  e.day_class = spat::day_class_of(day);
  return e;
}

/// Oracle run for one approach over one clock span, calibrated with the exact discharge rate.
inline std::vector<spat::StartEvent> oracle_events(spat::SimConfig s, spat::Approach a = spat::Approach::N) {
  const auto sim = spat::simulate(s);
  std::vector<spat::StartEvent> out;
  for (auto& e : spat::calibrate(sim.records, spat::oracle_calibration(s))) {
    if (e.approach == a) out.push_back(std::move(e));
  }
  return out;
}

inline spat::SimConfig oracle_config(std::uint64_t seed, int cycle = 90, int red = 50, double jitter = 5.0) {
  spat::SimConfig s;
  s.plan = spat::fixed_plan("A", cycle, red);
  s.start_jitter_sd_s = jitter;
  s.seed = seed;
  return s;
}

}  // namespace testing
