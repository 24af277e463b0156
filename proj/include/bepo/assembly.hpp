#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bepo/grid.hpp"
#include "bepo/model.hpp"
#include "bepo/observables.hpp"
#include "bepo/sparse.hpp"

namespace bepo {

/// M v = rhs for the scaled resolvent equation v - L v = g~ on the truncated
/// grid, with zero-flux rows in y at j = 1 and j = J.
struct SparseSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;

  std::size_t size() const { return matrix.n; }
};

/// Coefficients the stencil of node (i, j, k) depends on.
struct StencilContext {
  double speed_xz;   // y~_j / lambda, transport speed in x~ and z~
  double beta;       // drift at the unscaled node, transport speed in y~
  double diffusion;  // lambda sigma^2 / 2
};

StencilContext stencil_context(const Grid& grid, const ModelParams& p, int i, int j, int k);

/// Closed-form entries, node by node. Row-parallel with OpenMP.
CsrMatrix assemble_matrix(const Grid& grid, const ModelParams& p, double lambda);

/// Same entries through triplet accumulation and a sort-and-merge pass; serial.
CsrMatrix assemble_matrix_serial(const Grid& grid, const ModelParams& p, double lambda);

/// Builds M by applying the generic one-sided/centred difference operators to
/// every unit basis vector. Costs O(n^2) row evaluations: small grids only.
CsrMatrix oracle_assemble(const Grid& grid, const ModelParams& p, double lambda);

/// g at the unscaled node coordinates on equation rows, 0 on the y-boundary rows.
std::vector<double> assemble_rhs(const Grid& grid, const Observable& g);

SparseSystem assemble_system(const Grid& grid, const ModelParams& p, const Observable& g);

/// Matrix dump for diffing (coordinate text, 1-based, sorted).
void export_matrix(std::ostream& os, const CsrMatrix& m);

}  // namespace bepo
