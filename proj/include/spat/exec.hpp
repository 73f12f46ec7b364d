#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace spat {

/// Execution policy for kernels that have both a serial reference and an OpenMP path.
enum class Exec { serial, parallel };

/// Runs body(i) for i in [0, n). Under Exec::parallel iterations are spread across
/// OpenMP threads; the first exception thrown by any iteration is rethrown afterwards.
template <class Body>
void for_each_index(Exec exec, std::size_t n, Body&& body) {
  if (exec == Exec::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace spat
