#pragma once

// Time-of-day plan boundaries: a coarse sliding-window cycle scan finds ranges
// where the cycle changes, and a two-window dispersion search pins each change.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spat/config.hpp"
#include "spat/cycle_estimator.hpp"
#include "spat/error.hpp"
#include "spat/exec.hpp"

namespace spat {

struct WindowEstimate {
  std::int64_t start_s = 0;  // local clock seconds
  std::optional<CycleEstimate> estimate;
  std::optional<EstimationFailure> failure;
  std::size_t support_n = 0;

  bool reliable() const { return estimate.has_value(); }
  double cycle_s() const { return estimate ? estimate->best.cycle_s : 0.0; }
};

/// A clock range that may contain a plan change, with the reliable cycle
/// estimates found immediately before and after it.
struct SwitchRange {
  std::int64_t start_s = 0;
  std::int64_t end_s = 0;
  std::optional<double> cycle_before;
  std::optional<double> cycle_after;
};

struct CoarseScan {
  std::vector<WindowEstimate> windows;
  std::vector<SwitchRange> candidate_ranges;
};

/// select_cycle on every coarse window of the day, then candidate ranges.
/// Throws insufficient_data when the events span under two hours or fewer than
/// two windows are reliable.
CoarseScan coarse_scan(std::span<const StartEvent> events, DayClass day_class, const EstimatorConfig& cfg = {},
                       Exec exec = Exec::serial);

/// Ranges between window midpoints where reliable neighbours disagree by more
/// than the same-cycle tolerance or where a reliable window meets an unreliable one.
std::vector<SwitchRange> find_candidate_ranges(std::span<const WindowEstimate> windows, const TodConfig& cfg);

/// RMS circular distance of the folded times from their modal 1 s bin, divided by C.
double dispersion(std::span<const double> times, double cycle);

struct DispersionScore {
  double cycle_s = 0.0;
  double psi = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

/// w (1 - C / C_max)^2.
double cycle_penalty(double cycle, double w, double c_max);

DispersionScore penalized_dispersion(std::span<const double> times, double cycle, double w = 0.1,
                                     double c_max = 600.0);

struct SplitResult {
  std::int64_t split_s = 0;
  double cycle_left = 0.0;
  double cycle_right = 0.0;
  double max_dispersion = 0.0;
};

/// Tries every split in the range and returns the one with the lowest
/// max(psi_left, psi_right) among splits whose two sides pick different cycles.
/// Throws no_switch_found if there is none.
SplitResult fine_search(std::span<const StartEvent> events, DayClass day_class, const SwitchRange& range,
                        const EstimatorConfig& cfg = {}, Exec exec = Exec::serial);

struct TodPeriod {
  std::int64_t start_s = 0;
  std::int64_t end_s = 0;
  double cycle_s = 0.0;
  double max_dispersion_at_split = 0.0;  // 0 for the first period
  double confidence = 0.0;               // median KS distance of the windows inside
};

struct TodSchedule {
  std::vector<TodPeriod> periods;
};

/// Coarse scan, fine search per range, then periods tiling [0, 86400). No
/// boundary is placed inside the night block.
TodSchedule build_schedule(std::span<const StartEvent> events, DayClass day_class, const EstimatorConfig& cfg = {},
                           Exec exec = Exec::serial);
TodSchedule build_schedule(std::span<const StartEvent> events, DayClass day_class, const CoarseScan& scan,
                           const EstimatorConfig& cfg = {}, Exec exec = Exec::serial);

}  // namespace spat
