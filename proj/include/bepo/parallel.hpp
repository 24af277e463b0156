#pragma once

#include <cstddef>
#include <span>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace bepo {

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Reductions below sum fixed-size blocks in parallel and then add the block
// partials in block order, so the result does not depend on the thread count.
inline constexpr std::size_t kReductionBlock = 4096;

double dot(std::span<const double> a, std::span<const double> b);
double dot_serial(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace bepo
