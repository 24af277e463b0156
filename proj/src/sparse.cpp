#include "bepo/sparse.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <ostream>

namespace bepo {

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return val[static_cast<std::size_t>(it - col.begin())];
}

CsrMatrix csr_from_triplets(std::size_t n, std::vector<Triplet> triplets) {
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);
  m.col.reserve(triplets.size());
  m.val.reserve(triplets.size());

  std::size_t t = 0;
  for (std::size_t r = 0; r < n; ++r) {
    m.row_ptr[r] = m.val.size();
    while (t < triplets.size() && triplets[t].row == r) {
      const std::size_t c = triplets[t].col;
      double sum = 0.0;
      while (t < triplets.size() && triplets[t].row == r && triplets[t].col == c) sum += triplets[t++].value;
      if (sum != 0.0 || c == r) {
        m.col.push_back(c);
        m.val.push_back(sum);
      }
    }
  }
  m.row_ptr[n] = m.val.size();
  assert(t == triplets.size());
  return m;
}

namespace {

inline double row_dot(const CsrMatrix& a, std::size_t r, const double* x) {
  double s = 0.0;
  for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) s += a.val[p] * x[a.col[p]];
  return s;
}

}  // namespace

void spmv_serial(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == a.n && y.size() == a.n);
  for (std::size_t r = 0; r < a.n; ++r) y[r] = row_dot(a, r, x.data());
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == a.n && y.size() == a.n);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) y[r] = row_dot(a, static_cast<std::size_t>(r), x.data());
}

void write_coordinate(std::ostream& os, const CsrMatrix& a) {
  char buf[96];
  for (std::size_t r = 0; r < a.n; ++r)
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
      std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", r + 1, a.col[p] + 1, a.val[p]);
      os << buf;
    }
}

}  // namespace bepo
