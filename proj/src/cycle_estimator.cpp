#include "spat/cycle_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spat/error.hpp"
#include "spat/spectrum.hpp"

namespace spat {

namespace {

void require_usable(const AlignedWindow& window) {
  if (window.events.empty()) throw EstimationError(EstimationFailure::empty_input, "window has no events");
  if (window.low_support) {
    throw EstimationError(EstimationFailure::insufficient_data,
                          "window has " + std::to_string(window.size()) + " events");
  }
}

std::vector<double> folded(const AlignedWindow& window, double cycle) {
  std::vector<double> out;
  out.reserve(window.size());
  for (const auto& e : window.events) out.push_back(map_to_cycle(static_cast<double>(e.rel_time_s), cycle));
  return out;
}

}  // namespace

EventSeries build_series(const AlignedWindow& window) {
  if (window.events.empty()) throw EstimationError(EstimationFailure::empty_input, "window has no events");
  EventSeries s;
  s.counts.assign(static_cast<std::size_t>(window.length_s), 0.0);
  for (const auto& e : window.events) {
    if (e.rel_time_s < 0 || e.rel_time_s >= window.length_s) throw DomainError("event outside its window");
    s.counts[static_cast<std::size_t>(e.rel_time_s)] += 1.0;
  }
  return s;
}

std::vector<double> fft_candidates(const EventSeries& series, const CycleConfig& cfg) {
  const auto n = series.counts.size();
  if (static_cast<double>(n) < 2.0 * cfg.c_max_s) {
    throw DomainError("series of " + std::to_string(n) + " s is shorter than twice the maximum cycle");
  }
  const auto mag = magnitude_spectrum(series.counts);
  const double total = std::accumulate(series.counts.begin(), series.counts.end(), 0.0);
  const double floor = 1e-9 * std::max(1.0, total);

  const auto lo = static_cast<std::size_t>(std::ceil(static_cast<double>(n) / cfg.c_max_s));
  const auto hi = std::min(mag.size() - 1, static_cast<std::size_t>(std::floor(static_cast<double>(n) / cfg.min_cycle_s)));
  std::vector<std::size_t> bins;
  for (auto m = std::max<std::size_t>(lo, 1); m <= hi; ++m) bins.push_back(m);
  std::stable_sort(bins.begin(), bins.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

  if (bins.empty() || mag[bins.front()] <= floor) {
    throw EstimationError(EstimationFailure::no_periodicity, "spectrum is flat");
  }
  std::vector<double> periods;
  for (const auto m : bins) {
    if (periods.size() >= static_cast<std::size_t>(cfg.k_candidates)) break;
    if (mag[m] <= floor) break;
    const double p = static_cast<double>(n) / static_cast<double>(m);
    const bool dup = std::any_of(periods.begin(), periods.end(), [&](double q) { return std::abs(p - q) <= 1.0; });
    if (!dup) periods.push_back(p);
  }
  return periods;
}

double map_to_cycle(double t, double cycle) {
  if (!(cycle > 0.0)) throw DomainError("cycle must be positive");
  return t - std::round(t / cycle) * cycle;
}

double ks_statistic(std::span<const double> mapped, double cycle) {
  if (mapped.empty()) throw DomainError("KS statistic of an empty sample");
  if (!(cycle > 0.0)) throw DomainError("cycle must be positive");
  std::vector<double> x(mapped.begin(), mapped.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double g = std::clamp(x[i] / cycle + 0.5, 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - g, g - static_cast<double>(i) / n});
  }
  return d;
}

CycleEstimate select_among(const AlignedWindow& window, std::span<const double> periods, const CycleConfig& cfg) {
  require_usable(window);
  if (periods.empty()) throw EstimationError(EstimationFailure::no_periodicity, "no candidate periods");
  const auto series = build_series(window);

  CycleEstimate est;
  est.support_n = window.size();
  for (const double c : periods) {
    CycleCandidate cand;
    cand.cycle_s = c;
    cand.fft_magnitude = magnitude_at_period(series.counts, c);
    cand.ks_d = ks_statistic(folded(window, c), c);
    est.candidates.push_back(cand);
  }
  std::stable_sort(est.candidates.begin(), est.candidates.end(), [](const CycleCandidate& a, const CycleCandidate& b) {
    if (a.ks_d != b.ks_d) return a.ks_d > b.ks_d;
    return a.cycle_s > b.cycle_s;
  });
  est.best = est.candidates.front();
  if (est.best.ks_d < cfg.min_ks) {
    throw EstimationError(EstimationFailure::unreliable, "best KS distance " + format_double(est.best.ks_d) +
                                                             " below " + format_double(cfg.min_ks));
  }
  return est;
}

CycleEstimate select_cycle(const AlignedWindow& window, const CycleConfig& cfg) {
  require_usable(window);
  const auto periods = fft_candidates(build_series(window), cfg);
  return select_among(window, periods, cfg);
}

CycleCandidate fft_only_cycle(const AlignedWindow& window, std::span<const double> periods) {
  if (periods.empty()) throw EstimationError(EstimationFailure::no_periodicity, "no candidate periods");
  const auto series = build_series(window);
  CycleCandidate best;
  best.fft_magnitude = -1.0;
  for (const double c : periods) {
    const double m = magnitude_at_period(series.counts, c);
    if (m > best.fft_magnitude) best = {c, m, 0.0};
  }
  return best;
}

}  // namespace spat
