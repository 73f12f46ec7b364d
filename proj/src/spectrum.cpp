#include "spat/spectrum.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>

namespace spat {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// FFTW planning is not thread-safe; execution of an existing plan on fresh
// aligned buffers is.
fftw_plan r2c_plan(int n) {
  static std::mutex mutex;
  static std::map<int, fftw_plan> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE);
  plans.emplace(n, plan);
  return plan;
}

}  // namespace

std::vector<double> magnitude_spectrum(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n == 0) return {};
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(n));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(n / 2 + 1));
  for (int i = 0; i < n; ++i) in.get()[i] = x[i] - mean;
  fftw_execute_dft_r2c(r2c_plan(n), in.get(), out.get());
  std::vector<double> mag(n / 2 + 1);
  for (int m = 0; m <= n / 2; ++m) mag[m] = std::hypot(out.get()[m][0], out.get()[m][1]);
  return mag;
}

double magnitude_at_period(std::span<const double> x, double period) {
  if (x.empty()) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double re = 0.0, im = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double v = x[t] - mean;
    const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / period;
    re += v * std::cos(phase);
    im -= v * std::sin(phase);
  }
  return std::hypot(re, im);
}

}  // namespace spat
