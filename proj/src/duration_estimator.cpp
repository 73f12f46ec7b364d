#include "spat/duration_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>

#include "spat/cycle_estimator.hpp"
#include "spat/error.hpp"

namespace spat {

namespace {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
};

Line least_squares(std::span<const double> t, std::size_t begin, std::size_t end) {
  const double n = static_cast<double>(end - begin);
  double sx = 0, sy = 0;
  for (auto i = begin; i < end; ++i) {
    sx += static_cast<double>(i);
    sy += t[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (auto i = begin; i < end; ++i) {
    const double dx = static_cast<double>(i) - mx;
    sxx += dx * dx;
    sxy += dx * (t[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

std::int64_t floor_mod(std::int64_t a, std::int64_t m) { return ((a % m) + m) % m; }

}  // namespace

std::vector<double> gradient_series(std::span<const double> sorted_waits) {
  if (sorted_waits.size() < 2) {
    throw EstimationError(EstimationFailure::insufficient_data, "need at least two waiting times");
  }
  std::vector<double> g(sorted_waits.size() - 1);
  for (std::size_t i = 0; i + 1 < sorted_waits.size(); ++i) g[i] = sorted_waits[i + 1] - sorted_waits[i];
  return g;
}

std::vector<double> local_std(std::span<const double> g, int w) {
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  std::vector<double> sigma(g.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - w);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, i + w);
    const auto m = static_cast<double>(hi - lo + 1);
    if (m < 2) continue;
    double mean = 0.0;
    for (auto j = lo; j <= hi; ++j) mean += g[j];
    mean /= m;
    double ss = 0.0;
    for (auto j = lo; j <= hi; ++j) ss += (g[j] - mean) * (g[j] - mean);
    sigma[i] = std::sqrt(ss / (m - 1));
  }
  return sigma;
}

std::size_t find_inflection(std::span<const double> g, std::span<const double> sigma, double alpha, std::size_t first,
                            std::size_t last) {
  if (sigma.empty()) throw EstimationError(EstimationFailure::no_inflection, "no gradients");
  const double theta = alpha * std::accumulate(sigma.begin(), sigma.end(), 0.0) / static_cast<double>(sigma.size());
  if (!(theta > 0.0)) throw EstimationError(EstimationFailure::no_inflection, "all gradients are equal");
  last = std::min(last, g.size() - 1);
  for (auto k = std::max<std::size_t>(first, 1); k <= last; ++k) {
    if (std::abs(g[k] - g[k - 1]) > theta) return k;
  }
  throw EstimationError(EstimationFailure::no_inflection, "no gradient change above " + format_double(theta));
}

RedFit red_duration(std::span<const double> sorted_waits, std::size_t i_star, int exclusion_W, int min_segment) {
  const auto n = static_cast<std::ptrdiff_t>(sorted_waits.size());
  const auto k = static_cast<std::ptrdiff_t>(i_star);
  const auto low_n = k - exclusion_W;
  const auto high_begin = k + exclusion_W + 1;
  if (low_n < std::max(min_segment, 2) || n - high_begin < std::max(min_segment, 2)) {
    throw EstimationError(EstimationFailure::insufficient_data, "a regression segment is too short");
  }
  const auto low = least_squares(sorted_waits, 0, static_cast<std::size_t>(low_n));
  const auto high = least_squares(sorted_waits, static_cast<std::size_t>(high_begin), static_cast<std::size_t>(n));
  const double scale = std::max({1.0, std::abs(low.slope), std::abs(high.slope)});
  if (std::abs(low.slope - high.slope) <= 1e-12 * scale) {
    throw EstimationError(EstimationFailure::degenerate_regression, "regression lines are parallel");
  }
  RedFit fit{low.slope, low.intercept, high.slope, high.intercept, 0.0, 0.0};
  fit.i_pred = (high.intercept - low.intercept) / (low.slope - high.slope);
  fit.t_pred = low.slope * fit.i_pred + low.intercept;
  return fit;
}

InflectionAnalysis analyze_waits(std::span<const double> waits, int cycle_s, const DurationConfig& cfg) {
  InflectionAnalysis a;
  a.alpha = cfg.alpha;
  a.window = cfg.grad_window;
  a.exclusion = cfg.exclusion_W;
  for (const double w : waits) {
    if (w <= cycle_s) a.sorted_waits.push_back(w);
  }
  std::sort(a.sorted_waits.begin(), a.sorted_waits.end());
  a.gradients = gradient_series(a.sorted_waits);
  a.local_stds = local_std(a.gradients, cfg.grad_window);
  a.threshold = cfg.alpha * std::accumulate(a.local_stds.begin(), a.local_stds.end(), 0.0) /
                static_cast<double>(a.local_stds.size());

  const auto n = static_cast<std::ptrdiff_t>(a.sorted_waits.size());
  const std::ptrdiff_t first = cfg.exclusion_W + cfg.min_segment;
  const std::ptrdiff_t last = n - 1 - cfg.exclusion_W - cfg.min_segment;
  if (first > last) {
    throw EstimationError(EstimationFailure::insufficient_data,
                          std::to_string(n) + " single-cycle waits cannot hold two regression segments");
  }
  a.i_star = find_inflection(a.gradients, a.local_stds, cfg.alpha, static_cast<std::size_t>(first),
                             static_cast<std::size_t>(last));
  a.fit = red_duration(a.sorted_waits, a.i_star, cfg.exclusion_W, cfg.min_segment);
  const double red = std::round(a.fit.t_pred);
  if (!(red > 0.0 && red < cycle_s)) {
    throw EstimationError(EstimationFailure::implausible_red, "red " + format_double(red) + " outside (0, " +
                                                                  std::to_string(cycle_s) + ")");
  }
  a.red_s = static_cast<int>(red);
  return a;
}

CycleOverlay build_overlay(const OverlaySamples& samples, int cycle_s, const LocalTime& time) {
  if (cycle_s <= 0) throw DomainError("cycle must be positive");
  const auto c = static_cast<std::int64_t>(cycle_s);

  std::map<std::int64_t, std::int64_t> anchor;  // day -> first start
  for (const auto ts : samples.starts) {
    auto [it, fresh] = anchor.try_emplace(time.day_index(ts), ts);
    if (!fresh) it->second = std::min(it->second, ts);
  }
  const auto fold = [&](std::int64_t ts) -> std::optional<std::int64_t> {
    const auto it = anchor.find(time.day_index(ts));
    if (it == anchor.end()) return std::nullopt;
    return static_cast<std::int64_t>(map_to_cycle(static_cast<double>(ts - it->second), static_cast<double>(c)));
  };

  std::map<std::int64_t, int> start_bins;
  for (const auto ts : samples.starts) ++start_bins[*fold(ts)];
  std::int64_t mode = 0;
  int best = 0;
  for (const auto& [bin, count] : start_bins) {
    if (count > best) {
      best = count;
      mode = bin;
    }
  }
  const auto second = [&](std::int64_t folded) { return static_cast<std::size_t>(floor_mod(folded - mode, c)); };

  CycleOverlay o;
  o.cross_freq.assign(static_cast<std::size_t>(c), 0.0);
  o.wait_count.assign(static_cast<std::size_t>(c), 0.0);
  for (const auto ts : samples.crossings) {
    if (auto f = fold(ts)) o.cross_freq[second(*f)] += 1.0;
  }
  for (const auto& [stop, start] : samples.waits) {
    if (start - stop > c) continue;
    const auto f = fold(stop);
    if (!f) continue;
    for (std::int64_t t = 0; t < start - stop; ++t) o.wait_count[second(*f + t)] += 1.0;
  }
  for (auto* curve : {&o.cross_freq, &o.wait_count}) {
    const double peak = *std::max_element(curve->begin(), curve->end());
    if (peak > 0.0) {
      for (auto& v : *curve) v /= peak;
    }
  }
  return o;
}

VoteResult vote_confirm(const CycleOverlay& overlay, int cycle_s, int red_s) {
  const auto c = static_cast<std::size_t>(cycle_s);
  if (cycle_s <= 0 || overlay.wait_count.size() != c || overlay.cross_freq.size() != c) {
    throw DomainError("overlay length must equal the cycle");
  }
  if (*std::max_element(overlay.wait_count.begin(), overlay.wait_count.end()) <= 0.0) {
    throw EstimationError(EstimationFailure::unconfirmable, "no waiting vehicles");
  }
  VoteResult v;
  v.lo = static_cast<int>(std::min_element(overlay.wait_count.begin(), overlay.wait_count.end()) -
                          overlay.wait_count.begin());
  std::size_t s = static_cast<std::size_t>(v.lo);
  while (s < c && !(overlay.cross_freq[s] < overlay.wait_count[s])) ++s;
  if (s == c) throw EstimationError(EstimationFailure::unconfirmable, "crossing and waiting curves never cross");
  v.hi = static_cast<int>(s);
  const int switch_s = ((cycle_s - red_s) % cycle_s + cycle_s) % cycle_s;
  v.valid = switch_s >= v.lo && switch_s <= v.hi;
  return v;
}

}  // namespace spat
