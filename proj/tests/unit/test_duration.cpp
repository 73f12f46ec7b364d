#include <algorithm>
#include <numeric>
#include <random>

#include "../oracles.hpp"
#include "catch_amalgamated.hpp"
#include "spat/duration_estimator.hpp"
#include "spat/error.hpp"
#include "spat/pipeline.hpp"
#include "support.hpp"

using namespace spat;
using Catch::Matchers::WithinAbs;

namespace {

auto failure_is(EstimationFailure k) {
  return Catch::Matchers::Predicate<EstimationError>([k](const EstimationError& e) { return e.kind() == k; });
}

/// 200 waits near 60 s then `tail` waits spread over 80-300 s, sorted.
std::vector<double> knee_waits(std::uint64_t seed, int tail = 20) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> bulk(60, 1);
  std::uniform_real_distribution<double> spread(80, 300);
  std::vector<double> w;
  for (int i = 0; i < 200; ++i) w.push_back(bulk(rng));
  for (int i = 0; i < tail; ++i) w.push_back(spread(rng));
  std::sort(w.begin(), w.end());
  return w;
}

std::vector<double> two_lines(int n_low, int n_high) {
  std::vector<double> t;
  for (int i = 0; i < n_low + n_high; ++i) t.push_back(i < n_low ? 0.01 * i + 50 : 2.0 * i - 300);
  return t;
}

struct OracleRun {
  SimConfig cfg;
  SimResult sim;
  std::vector<StartEvent> events;
  StreamKey key{"A", Approach::N, Movement::straight};
  TodPeriod period;
};

OracleRun red_oracle(std::uint64_t seed) {
  OracleRun r;
  r.cfg = testing::oracle_config(seed, 90, 50, 1.5);
  r.cfg.days = 30;
  r.cfg.faults.long_parker_fraction = 0.1;
  r.cfg.span_start_s = 7 * 3600;
  r.cfg.span_end_s = 10 * 3600;
  r.sim = simulate(r.cfg);
  r.events = calibrate(r.sim.records, oracle_calibration(r.cfg));
  r.period = {r.cfg.span_start_s, r.cfg.span_end_s, 90.0, 0.0, 0.0};
  return r;
}

CycleOverlay overlay_of(const OracleRun& r) {
  return build_overlay(overlay_samples(r.sim.records, r.events, r.key, DayClass::weekday, r.period.start_s,
                                       r.period.end_s),
                       90);
}

}  // namespace

TEST_CASE("gradient series", "[duration]") {
  CHECK(gradient_series(std::vector<double>{10, 12, 15}) == std::vector<double>{2, 3});
  const auto flat = gradient_series(std::vector<double>(10, 4.0));
  CHECK(std::all_of(flat.begin(), flat.end(), [](double g) { return g == 0; }));
  CHECK_THROWS_MATCHES(gradient_series(std::vector<double>{1}), EstimationError,
                       failure_is(EstimationFailure::insufficient_data));
}

TEST_CASE("gradients match differencing and telescope", "[duration][oracle][property]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto w = knee_waits(seed);
    const auto g = gradient_series(w);
    CHECK(g == oracle::differences(w));
    CHECK_THAT(std::accumulate(g.begin(), g.end(), 0.0), WithinAbs(w.back() - w.front(), 1e-9));
  }
}

TEST_CASE("local standard deviation", "[duration]") {
  const auto zero = local_std(std::vector<double>(9, 2.0), 3);
  CHECK(std::all_of(zero.begin(), zero.end(), [](double s) { return s == 0; }));

  const std::vector<double> g{0, 0, 0, 9, 0, 0, 0};
  const auto s = local_std(g, 3);
  const double mean = 9.0 / 7;
  const double expected = std::sqrt((6 * mean * mean + (9 - mean) * (9 - mean)) / 6);
  CHECK_THAT(s[3], WithinAbs(expected, 1e-12));
  CHECK_THAT(s[0], WithinAbs(oracle::sample_std({0, 0, 0, 9}), 1e-12));
}

TEST_CASE("local standard deviation matches a brute-force window", "[duration][oracle][property]") {
  std::mt19937_64 rng(3);
  std::exponential_distribution<double> e(0.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> g(50 + trial * 7);
    for (auto& v : g) v = e(rng);
    for (const int w : {1, 3, 5}) {
      const auto s = local_std(g, w);
      const auto ref = oracle::window_stds(g, w);
      for (std::size_t i = 0; i < g.size(); ++i) CHECK_THAT(s[i], WithinAbs(ref[i], 1e-12));
    }
  }
}

TEST_CASE("inflection on the knee construction", "[duration]") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto w = knee_waits(seed);
    const auto g = gradient_series(w);
    const auto sigma = local_std(g, 3);
    const auto k = find_inflection(g, sigma, 10);
    CHECK(k >= 195);
    CHECK(k <= 210);
    CHECK(static_cast<long>(k) == oracle::first_jump(g, sigma, 10));
  }
}

TEST_CASE("inflection degenerate cases", "[duration]") {
  const std::vector<double> g(30, 1.0);
  CHECK_THROWS_MATCHES(find_inflection(g, local_std(g, 3), 10), EstimationError,
                       failure_is(EstimationFailure::no_inflection));

  std::vector<double> jump(40, 1.0);
  jump[23] = 500;
  CHECK(find_inflection(jump, local_std(jump, 3), 10) == 23);
  CHECK(find_inflection(jump, local_std(jump, 3), 0.001) == 23);
  CHECK_THROWS_MATCHES(find_inflection(jump, local_std(jump, 3), 10, 25), EstimationError,
                       failure_is(EstimationFailure::no_inflection));
}

TEST_CASE("the detector scales with the waits", "[duration][property]") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = knee_waits(seed, 60);
    auto shifted = w;
    for (auto& t : shifted) t += 17.5;
    const auto g = gradient_series(w), gs = gradient_series(shifted);
    const auto s = local_std(g, 3), ss = local_std(gs, 3);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK_THAT(ss[i], WithinAbs(s[i], 1e-9));
    const auto k = find_inflection(g, s, 10);
    CHECK(find_inflection(gs, ss, 10) == k);
    const auto f = red_duration(w, k, 20), fs = red_duration(shifted, k, 20);
    CHECK_THAT(fs.a_low, WithinAbs(f.a_low, 1e-9));
    CHECK_THAT(fs.a_high, WithinAbs(f.a_high, 1e-9));
    CHECK_THAT(fs.b_low, WithinAbs(f.b_low + 17.5, 1e-6));
    CHECK_THAT(fs.i_pred, WithinAbs(f.i_pred, 1e-6));
    CHECK_THAT(fs.t_pred, WithinAbs(f.t_pred + 17.5, 1e-6));
  }
}

TEST_CASE("two-line intersection", "[duration]") {
  const auto t = two_lines(200, 200);
  const auto fit = red_duration(t, 200, 20);
  CHECK_THAT(fit.a_low, WithinAbs(0.01, 1e-12));
  CHECK_THAT(fit.b_low, WithinAbs(50, 1e-9));
  CHECK_THAT(fit.a_high, WithinAbs(2, 1e-12));
  CHECK_THAT(fit.b_high, WithinAbs(-300, 1e-9));
  CHECK_THAT(fit.i_pred, WithinAbs(350 / 1.99, 1e-9));
  CHECK_THAT(fit.t_pred, WithinAbs(0.01 * 350 / 1.99 + 50, 1e-9));
  CHECK_THAT(fit.t_pred, WithinAbs(51.76, 0.01));
}

TEST_CASE("regression lines match the normal equations", "[duration][oracle][property]") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto w = knee_waits(seed);
    const auto fit = red_duration(w, 150, 20);
    const auto [al, bl] = oracle::fit_line(w, 0, 130);
    const auto [ah, bh] = oracle::fit_line(w, 171, w.size());
    CHECK_THAT(fit.a_low, WithinAbs(al, 1e-9));
    CHECK_THAT(fit.b_low, WithinAbs(bl, 1e-7));
    CHECK_THAT(fit.a_high, WithinAbs(ah, 1e-9));
    CHECK_THAT(fit.b_high, WithinAbs(bh, 1e-7));
    CHECK_THAT(fit.i_pred, WithinAbs((bh - bl) / (al - ah), 1e-6));
  }
}

TEST_CASE("regression degenerate cases", "[duration]") {
  std::vector<double> parallel;
  for (int i = 0; i < 100; ++i) parallel.push_back(0.5 * i + (i >= 50 ? 10 : 0));
  CHECK_THROWS_MATCHES(red_duration(parallel, 50, 20), EstimationError,
                       failure_is(EstimationFailure::degenerate_regression));
  CHECK_THROWS_MATCHES(red_duration(two_lines(20, 60), 20, 20), EstimationError,
                       failure_is(EstimationFailure::insufficient_data));
  CHECK_THROWS_MATCHES(red_duration(two_lines(60, 20), 60, 20), EstimationError,
                       failure_is(EstimationFailure::insufficient_data));
}

TEST_CASE("duplicating every wait barely moves the estimate", "[duration][property]") {
  const auto t = two_lines(200, 200);
  std::vector<double> doubled;
  for (const double v : t) doubled.insert(doubled.end(), {v, v});
  const auto a = red_duration(t, 200, 20);
  const auto b = red_duration(doubled, 400, 20);
  CHECK(std::abs(a.t_pred - b.t_pred) < 1.0);
}

TEST_CASE("analysis drops multi-cycle waits and reports the chain", "[duration]") {
  auto w = knee_waits(1, 60);
  w.push_back(1000);
  const auto a = analyze_waits(w, 300);
  CHECK(a.sorted_waits.size() == 260);
  CHECK(std::is_sorted(a.sorted_waits.begin(), a.sorted_waits.end()));
  CHECK(a.gradients.size() == 259);
  CHECK(a.local_stds.size() == 259);
  CHECK(a.threshold > 0);
  CHECK(a.alpha == 10);
  CHECK(a.window == 3);
  CHECK(a.exclusion == 20);
  CHECK(a.red_s == static_cast<int>(std::round(a.fit.t_pred)));
  CHECK(a.red_s > 55);
  CHECK(a.red_s < 70);
}

TEST_CASE("analysis failure modes", "[duration]") {
  CHECK_THROWS_MATCHES(analyze_waits(std::vector<double>(10, 5.0), 90), EstimationError,
                       failure_is(EstimationFailure::insufficient_data));
  CHECK_THROWS_MATCHES(analyze_waits(std::vector<double>(100, 5.0), 90), EstimationError,
                       failure_is(EstimationFailure::no_inflection));
  // A flat run near zero followed by a steep run puts the intersection below 1 s.
  std::vector<double> w;
  for (int i = 0; i < 100; ++i) w.push_back(0.3 + 1e-4 * i);
  for (int j = 0; j < 60; ++j) w.push_back(5.0 + j);
  CHECK_THROWS_MATCHES(analyze_waits(w, 90), EstimationError, failure_is(EstimationFailure::implausible_red));
}

TEST_CASE("red duration from oracle waits", "[duration]") {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto r = red_oracle(seed);
    const auto est = estimate_phase(r.sim.records, r.events, r.key, DayClass::weekday, r.period);
    hits += std::abs(est.red_s - 50) <= 3;
    CHECK(est.green_s == est.cycle_s - est.red_s);
    CHECK(est.support_n >= 500);
  }
  CHECK(hits >= 9);
}

TEST_CASE("overlay shape and normalisation", "[duration]") {
  const auto r = red_oracle(3);
  const auto o = overlay_of(r);
  REQUIRE(o.cross_freq.size() == 90);
  REQUIRE(o.wait_count.size() == 90);
  CHECK(*std::max_element(o.cross_freq.begin(), o.cross_freq.end()) == 1.0);
  CHECK(*std::max_element(o.wait_count.begin(), o.wait_count.end()) == 1.0);
  CHECK(*std::min_element(o.wait_count.begin(), o.wait_count.end()) >= 0.0);
  // Crossings gather in green, waiting in red.
  const double green = std::accumulate(o.cross_freq.begin(), o.cross_freq.begin() + 40, 0.0);
  const double red = std::accumulate(o.cross_freq.begin() + 40, o.cross_freq.end(), 0.0);
  CHECK(green > 3 * red);
}

TEST_CASE("vote accepts the true red and recalls a corrupted one", "[duration]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto o = overlay_of(red_oracle(seed));
    const auto v = vote_confirm(o, 90, 50);
    CHECK(v.valid);
    CHECK(v.lo <= v.hi);
    CHECK_FALSE(vote_confirm(o, 90, 20).valid);
  }
}

TEST_CASE("vote on hand-made curves", "[duration]") {
  CycleOverlay o;
  o.cross_freq.assign(10, 0.0);
  o.wait_count.assign(10, 0.0);
  for (int s = 0; s < 4; ++s) o.cross_freq[s] = 1.0;
  for (int s = 6; s < 10; ++s) o.wait_count[s] = 0.2 * (s - 5);
  o.wait_count[0] = 0.5;
  // Earliest minimum of waiting is second 1; crossings fall below waiting at second 6.
  const auto v = vote_confirm(o, 10, 5);
  CHECK(v.lo == 1);
  CHECK(v.hi == 6);
  CHECK(v.valid);
  CHECK(vote_confirm(o, 10, 4).valid);
  CHECK_FALSE(vote_confirm(o, 10, 3).valid);
  CHECK(vote_confirm(o, 10, 9).valid);
  CHECK_FALSE(vote_confirm(o, 10, 10).valid);

  CycleOverlay nobody = o;
  std::fill(nobody.wait_count.begin(), nobody.wait_count.end(), 0.0);
  CHECK_THROWS_MATCHES(vote_confirm(nobody, 10, 5), EstimationError, failure_is(EstimationFailure::unconfirmable));

  CycleOverlay never = o;
  std::fill(never.cross_freq.begin(), never.cross_freq.end(), 1.0);
  CHECK_THROWS_MATCHES(vote_confirm(never, 10, 5), EstimationError, failure_is(EstimationFailure::unconfirmable));
  CHECK_THROWS_AS(vote_confirm(o, 12, 5), DomainError);
}

TEST_CASE("nobody waiting is unconfirmable", "[duration]") {
  auto r = red_oracle(4);
  OverlaySamples s = overlay_samples(r.sim.records, r.events, r.key, DayClass::weekday, r.period.start_s,
                                     r.period.end_s);
  s.waits.clear();
  CHECK_THROWS_MATCHES(vote_confirm(build_overlay(s, 90), 90, 50), EstimationError,
                       failure_is(EstimationFailure::unconfirmable));
}
