#include "bepo/parallel.hpp"

#include <cassert>
#include <cmath>
#include <vector>

namespace bepo {

namespace {

double block_dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double dot_serial(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  double total = 0.0;
  for (std::size_t lo = 0; lo < n; lo += kReductionBlock) {
    const std::size_t len = std::min(kReductionBlock, n - lo);
    total += block_dot(a.data() + lo, b.data() + lo, len);
  }
  return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
  if (nblocks <= 1) return dot_serial(a, b);
  std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t blk = 0; blk < static_cast<std::ptrdiff_t>(nblocks); ++blk) {
    const std::size_t lo = static_cast<std::size_t>(blk) * kReductionBlock;
    const std::size_t len = std::min(kReductionBlock, n - lo);
    partial[static_cast<std::size_t>(blk)] = block_dot(a.data() + lo, b.data() + lo, len);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace bepo
