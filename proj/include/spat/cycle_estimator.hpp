#pragma once

// Cycle length of one aligned window: FFT peaks propose candidate periods, and
// the candidate whose folded start times deviate most from uniform wins.

#include <cstddef>
#include <span>
#include <vector>

#include "spat/config.hpp"
#include "spat/preprocess.hpp"

namespace spat {

/// Start-event counts in 1 s bins over the window.
struct EventSeries {
  std::vector<double> counts;
};

EventSeries build_series(const AlignedWindow& window);

/// Periods (seconds) of the k strongest spectral peaks with period in
/// [min_cycle_s, c_max_s], strongest first, no two within 1 s of each other.
std::vector<double> fft_candidates(const EventSeries& series, const CycleConfig& cfg = {});

/// t - round(t / C) * C with halves rounded away from zero; the result lies in [-C/2, C/2].
double map_to_cycle(double t, double cycle);

/// Two-sided Kolmogorov-Smirnov distance between the sample and the uniform
/// distribution on [-C/2, C/2].
double ks_statistic(std::span<const double> mapped, double cycle);

struct CycleCandidate {
  double cycle_s = 0.0;
  double fft_magnitude = 0.0;
  double ks_d = 0.0;
};

struct CycleEstimate {
  CycleCandidate best;
  std::vector<CycleCandidate> candidates;  // by ks_d, descending
  std::size_t support_n = 0;
};

/// FFT candidates, then KS selection. Ties in D go to the longer cycle.
CycleEstimate select_cycle(const AlignedWindow& window, const CycleConfig& cfg = {});

/// KS selection over caller-supplied candidate periods.
CycleEstimate select_among(const AlignedWindow& window, std::span<const double> periods, const CycleConfig& cfg = {});

/// Baseline without the KS step: the candidate with the largest spectral magnitude.
CycleCandidate fft_only_cycle(const AlignedWindow& window, std::span<const double> periods);

}  // namespace spat
