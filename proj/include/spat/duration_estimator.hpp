#pragma once

// Red duration from the sorted single-cycle waiting times: the first sharp
// gradient change marks where outlier waits begin, and two regression lines
// fitted on either side of it intersect at the red duration. A crossing/waiting
// overlay on the cycle then confirms or recalls the estimate.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spat/config.hpp"
#include "spat/fcd_model.hpp"

namespace spat {

/// g[i] = t[i+1] - t[i]. Throws insufficient_data for fewer than two waits.
std::vector<double> gradient_series(std::span<const double> sorted_waits);

/// Sample standard deviation of g over [i - w, i + w], clipped at the ends.
std::vector<double> local_std(std::span<const double> g, int w);

/// First k in [first, last] with |g[k] - g[k-1]| > alpha * mean(sigma). k indexes
/// the sorted waits: the gradient changes at t[k]. Throws no_inflection if the
/// threshold is zero or never exceeded.
std::size_t find_inflection(std::span<const double> g, std::span<const double> sigma, double alpha,
                            std::size_t first = 1, std::size_t last = std::numeric_limits<std::size_t>::max());

struct RedFit {
  double a_low = 0.0, b_low = 0.0;
  double a_high = 0.0, b_high = 0.0;
  double i_pred = 0.0;
  double t_pred = 0.0;
};

/// Least-squares lines through t[i] for i < i_star - W and for i > i_star + W,
/// and their intersection.
RedFit red_duration(std::span<const double> sorted_waits, std::size_t i_star, int exclusion_W, int min_segment = 5);

struct InflectionAnalysis {
  std::vector<double> sorted_waits;
  std::vector<double> gradients;
  std::vector<double> local_stds;
  double threshold = 0.0;
  double alpha = 0.0;
  int window = 0;
  int exclusion = 0;
  std::size_t i_star = 0;
  RedFit fit;
  int red_s = 0;
};

/// Full chain on raw waits. Waits longer than the cycle are dropped first. The
/// inflection search is limited to indices that leave min_segment points on
/// both sides of the exclusion zone.
InflectionAnalysis analyze_waits(std::span<const double> waits, int cycle_s, const DurationConfig& cfg = {});

/// Timestamps feeding the overlay, all from one stream and one plan period.
struct OverlaySamples {
  std::vector<std::int64_t> starts;     // calibrated starts; set the per-day reference and green onset
  std::vector<std::int64_t> crossings;  // stop-line crossings
  std::vector<std::pair<std::int64_t, std::int64_t>> waits;  // [stop_ts, raw start)
};

/// Both curves over [0, C), second 0 at the modal green onset, each divided by its maximum.
struct CycleOverlay {
  std::vector<double> cross_freq;
  std::vector<double> wait_count;
};

CycleOverlay build_overlay(const OverlaySamples& samples, int cycle_s, const LocalTime& time = {});

struct VoteResult {
  bool valid = false;
  int lo = 0;  // earliest minimum of wait_count
  int hi = 0;  // first second from lo on where cross_freq < wait_count
};

/// valid iff the implied red onset second, C - red_s, lies in [lo, hi].
/// Throws unconfirmable if nobody waits or the curves never cross.
VoteResult vote_confirm(const CycleOverlay& overlay, int cycle_s, int red_s);

}  // namespace spat
