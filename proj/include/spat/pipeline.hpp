#pragma once

// Stage drivers that run the estimators over every stream in a dataset.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spat/config.hpp"
#include "spat/duration_estimator.hpp"
#include "spat/exec.hpp"
#include "spat/preprocess.hpp"
#include "spat/tod_estimator.hpp"

namespace spat {

struct PreprocessResult {
  std::vector<TrajectoryRecord> kept;
  std::size_t rejected = 0;
  std::vector<StartEvent> events;
};

PreprocessResult preprocess(std::span<const TrajectoryRecord> records, const CalibrationTable& table,
                            const EstimatorConfig& cfg = {});

/// Distinct stream keys in order.
std::vector<StreamKey> stream_keys(std::span<const StartEvent> events);

struct StreamCycles {
  StreamKey key;
  DayClass day_class = DayClass::weekday;
  std::optional<CoarseScan> scan;
  std::optional<EstimationFailure> failure;
  std::string detail;
};

struct StreamSchedule {
  StreamKey key;
  DayClass day_class = DayClass::weekday;
  std::optional<TodSchedule> schedule;
  std::optional<EstimationFailure> failure;
  std::string detail;
};

std::vector<StreamCycles> run_cycle_stage(std::span<const StartEvent> events, DayClass day_class,
                                          const EstimatorConfig& cfg = {}, Exec exec = Exec::serial);

std::vector<StreamSchedule> run_tod_stage(std::span<const StartEvent> events, std::span<const StreamCycles> cycles,
                                          const EstimatorConfig& cfg = {}, Exec exec = Exec::serial);

/// Red duration and vote for one stream and one schedule period. `records` and
/// `events` may hold other streams, periods and days; they are filtered here.
PhaseEstimate estimate_phase(std::span<const TrajectoryRecord> records, std::span<const StartEvent> events,
                             const StreamKey& key, DayClass day_class, const TodPeriod& period,
                             const EstimatorConfig& cfg = {});

/// Inputs to the crossing/waiting overlay for one stream and period.
OverlaySamples overlay_samples(std::span<const TrajectoryRecord> records, std::span<const StartEvent> events,
                               const StreamKey& key, DayClass day_class, std::int64_t start_s, std::int64_t end_s,
                               const LocalTime& time = {});

/// One estimate per schedule period, or a single recalled whole-day estimate
/// for streams whose schedule failed.
std::vector<PhaseEstimate> run_duration_stage(std::span<const TrajectoryRecord> records,
                                              std::span<const StartEvent> events,
                                              std::span<const StreamSchedule> schedules,
                                              const EstimatorConfig& cfg = {}, Exec exec = Exec::serial);

struct PipelineResult {
  PreprocessResult pre;
  std::vector<StreamCycles> cycles;
  std::vector<StreamSchedule> schedules;
  std::vector<PhaseEstimate> estimates;
};

PipelineResult run_pipeline(std::span<const TrajectoryRecord> records, const CalibrationTable& table,
                            DayClass day_class, const EstimatorConfig& cfg = {}, Exec exec = Exec::serial);

}  // namespace spat
