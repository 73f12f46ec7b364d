#pragma once

#include <span>
#include <vector>

namespace spat {

/// |X_m| for m = 0..n/2 of the real series after mean removal.
std::vector<double> magnitude_spectrum(std::span<const double> x);

/// |sum_t (x_t - mean) e^{-2 pi i t / period}|, the DFT magnitude at an arbitrary period.
double magnitude_at_period(std::span<const double> x, double period);

}  // namespace spat
