#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace bepo {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix, 0-based, columns sorted within each row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;  // size n + 1
  std::vector<std::size_t> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
  std::size_t row_begin(std::size_t r) const { return row_ptr[r]; }
  std::size_t row_end(std::size_t r) const { return row_ptr[r + 1]; }

  /// Value at (r, c), 0 when structurally absent.
  double at(std::size_t r, std::size_t c) const;
  double diagonal(std::size_t r) const { return at(r, r); }
};

/// Sorts by (row, col), sums duplicates and drops off-diagonal entries that
/// merge to exactly zero. Diagonal entries are always kept.
CsrMatrix csr_from_triplets(std::size_t n, std::vector<Triplet> triplets);

// y = A x. The OpenMP kernel splits rows across threads; each row is summed in
// column order, so it matches the serial reference bit-for-bit.
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
void spmv_serial(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// `row col value` per line, 1-based, sorted by (row, col).
void write_coordinate(std::ostream& os, const CsrMatrix& a);

}  // namespace bepo
