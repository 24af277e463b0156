#include "bepo/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "bepo/errors.hpp"

namespace bepo {

namespace {

inline double pos(double c) { return std::max(0.0, c); }
inline double neg(double c) { return std::min(0.0, c); }

void check_lambda(const Grid& grid, const ModelParams& p, double lambda) {
  p.validate();
  if (lambda != grid.lambda()) throw InvalidSpec("lambda does not match the grid's lambda");
  if (grid.spec().b != p.b) throw InvalidSpec("grid z half-width differs from the model's elasto-plastic bound b");
}

// At most diagonal + 4 neighbours per axis.
struct RowBuffer {
  std::array<std::size_t, 13> col{};
  std::array<double, 13> val{};
  std::size_t size = 0;

  void add(std::size_t c, double v) {
    for (std::size_t q = 0; q < size; ++q)
      if (col[q] == c) {
        val[q] += v;
        return;
      }
    col[size] = c;
    val[size] = v;
    ++size;
  }
};

// Row of M for node (i, j, k), following the node-class case tables.
//   x~ / z~ transport: second-order upwind inside, first-order on the
//     boundary-adjacent layer, inward one-sided second-order on the faces;
//   y~: centred diffusion plus second-order upwind drift with the same fallback;
//   y boundary: two-point zero-flux rows.
void build_row(const Grid& g, const ModelParams& p, int i, int j, int k, RowBuffer& row) {
  const int I = g.I(), J = g.J(), K = g.K();
  const auto at = [&](int a, int b, int c) { return g.offset(a, b, c); };
  const std::size_t self = at(i, j, k);
  row.size = 0;

  const NodeClass cls = g.classify(i, j, k);
  if (cls == NodeClass::NeumannY) {
    if (j == 1) {
      row.add(self, -1.0 / g.dy());
      row.add(at(i, j + 1, k), 1.0 / g.dy());
    } else {
      row.add(at(i, j - 1, k), -1.0 / g.dy());
      row.add(self, 1.0 / g.dy());
    }
    return;
  }

  const StencilContext s = stencil_context(g, p, i, j, k);
  const double c = s.speed_xz;
  const double beta = s.beta;
  const double dx = g.dx(), dy = g.dy(), dz = g.dz();
  const double diff = 2.0 * s.diffusion;  // lambda sigma^2

  // y~ part, identical for every equation row.
  const double iy = (2 < j && j < J - 1) ? 1.0 : 0.0;
  if (iy != 0.0) {
    row.add(at(i, j - 2, k), -neg(beta) / (2.0 * dy));
    row.add(at(i, j + 2, k), pos(beta) / (2.0 * dy));
  }
  row.add(at(i, j - 1, k), -diff / (2.0 * dy * dy) + (1.0 + iy) * neg(beta) / dy);
  row.add(at(i, j + 1, k), -diff / (2.0 * dy * dy) - (1.0 + iy) * pos(beta) / dy);
  double diag = 1.0 + diff / (dy * dy) + (2.0 + iy) * std::abs(beta) / (2.0 * dy);

  // x~ part.
  const bool x_minus = (i == 1), x_plus = (i == I);
  if (x_minus) {
    row.add(at(i + 1, j, k), -2.0 * pos(c) / dx);
    row.add(at(i + 2, j, k), pos(c) / (2.0 * dx));
    diag += 3.0 * pos(c) / (2.0 * dx);
  } else if (x_plus) {
    row.add(at(i - 1, j, k), 2.0 * neg(c) / dx);
    row.add(at(i - 2, j, k), -neg(c) / (2.0 * dx));
    diag += -3.0 * neg(c) / (2.0 * dx);
  } else {
    const double ix = (2 < i && i < I - 1) ? 1.0 : 0.0;
    if (ix != 0.0) {
      row.add(at(i - 2, j, k), -neg(c) / (2.0 * dx));
      row.add(at(i + 2, j, k), pos(c) / (2.0 * dx));
    }
    row.add(at(i - 1, j, k), (1.0 + ix) * neg(c) / dx);
    row.add(at(i + 1, j, k), -(1.0 + ix) * pos(c) / dx);
    diag += (2.0 + ix) * std::abs(c) / (2.0 * dx);
  }

  // z~ part.
  const bool z_minus = (k == 1), z_plus = (k == K);
  if (z_minus) {
    row.add(at(i, j, k + 1), -2.0 * pos(c) / dz);
    row.add(at(i, j, k + 2), pos(c) / (2.0 * dz));
    diag += 3.0 * pos(c) / (2.0 * dz);
  } else if (z_plus) {
    row.add(at(i, j, k - 1), 2.0 * neg(c) / dz);
    row.add(at(i, j, k - 2), -neg(c) / (2.0 * dz));
    diag += -3.0 * neg(c) / (2.0 * dz);
  } else {
    const double iz = (2 < k && k < K - 1) ? 1.0 : 0.0;
    if (iz != 0.0) {
      row.add(at(i, j, k - 2), -neg(c) / (2.0 * dz));
      row.add(at(i, j, k + 2), pos(c) / (2.0 * dz));
    }
    row.add(at(i, j, k - 1), (1.0 + iz) * neg(c) / dz);
    row.add(at(i, j, k + 1), -(1.0 + iz) * pos(c) / dz);
    diag += (2.0 + iz) * std::abs(c) / (2.0 * dz);
  }

  row.add(self, diag);
}

// Sort by column and drop exact off-diagonal zeros (e.g. all x~/z~ terms on the y~ = 0 plane).
std::size_t compact_row(RowBuffer& row, std::size_t self) {
  std::array<std::size_t, 13> order{};
  for (std::size_t q = 0; q < row.size; ++q) order[q] = q;
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(row.size),
            [&](std::size_t a, std::size_t b) { return row.col[a] < row.col[b]; });
  RowBuffer out;
  for (std::size_t q = 0; q < row.size; ++q) {
    const std::size_t o = order[q];
    if (row.val[o] != 0.0 || row.col[o] == self) {
      out.col[out.size] = row.col[o];
      out.val[out.size] = row.val[o];
      ++out.size;
    }
  }
  row = out;
  return row.size;
}

}  // namespace

StencilContext stencil_context(const Grid& grid, const ModelParams& p, int i, int j, int k) {
  return {grid.ys(j) / grid.lambda(), drift_beta(grid.x(i), grid.y(j), grid.z(k), p),
          grid.lambda() * p.sigma * p.sigma / 2.0};
}

CsrMatrix assemble_matrix(const Grid& grid, const ModelParams& p, double lambda) {
  check_lambda(grid, p, lambda);
  const std::size_t n = grid.size();
  CsrMatrix m;
  m.n = n;
  m.row_ptr.assign(n + 1, 0);

  // Pass 1: row lengths.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r) {
    const NodeIndex v = grid.node(static_cast<std::size_t>(r));
    RowBuffer row;
    build_row(grid, p, v.i, v.j, v.k, row);
    m.row_ptr[static_cast<std::size_t>(r) + 1] = compact_row(row, static_cast<std::size_t>(r));
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  m.col.resize(m.row_ptr[n]);
  m.val.resize(m.row_ptr[n]);

  // Pass 2: fill.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r) {
    const NodeIndex v = grid.node(static_cast<std::size_t>(r));
    RowBuffer row;
    build_row(grid, p, v.i, v.j, v.k, row);
    compact_row(row, static_cast<std::size_t>(r));
    const std::size_t base = m.row_ptr[static_cast<std::size_t>(r)];
    for (std::size_t q = 0; q < row.size; ++q) {
      m.col[base + q] = row.col[q];
      m.val[base + q] = row.val[q];
    }
  }
  return m;
}

CsrMatrix assemble_matrix_serial(const Grid& grid, const ModelParams& p, double lambda) {
  check_lambda(grid, p, lambda);
  std::vector<Triplet> triplets;
  triplets.reserve(grid.size() * 13);
  RowBuffer row;
  for (int i = 1; i <= grid.I(); ++i)
    for (int j = 1; j <= grid.J(); ++j)
      for (int k = 1; k <= grid.K(); ++k) {
        build_row(grid, p, i, j, k, row);
        const std::size_t r = grid.offset(i, j, k);
        for (std::size_t q = 0; q < row.size; ++q) triplets.push_back({r, row.col[q], row.val[q]});
      }
  return csr_from_triplets(grid.size(), std::move(triplets));
}

// ---------------------------------------------------------------------------
// Oracle: generic difference operators on a full field.

namespace {

class FieldOps {
 public:
  FieldOps(const Grid& g, const std::vector<double>& v) : g_(g), v_(v) {}

  double at(int i, int j, int k) const { return v_[g_.offset(i, j, k)]; }

  // Axis-generic shifted access: axis 0 = x, 1 = y, 2 = z.
  double shifted(int axis, int i, int j, int k, int d) const {
    if (axis == 0) return at(i + d, j, k);
    if (axis == 1) return at(i, j + d, k);
    return at(i, j, k + d);
  }
  double h(int axis) const { return axis == 0 ? g_.dx() : axis == 1 ? g_.dy() : g_.dz(); }

  double fwd(int a, int i, int j, int k) const { return (shifted(a, i, j, k, 1) - shifted(a, i, j, k, 0)) / h(a); }
  double bwd(int a, int i, int j, int k) const { return (shifted(a, i, j, k, 0) - shifted(a, i, j, k, -1)) / h(a); }
  double centred2(int a, int i, int j, int k) const {
    return (shifted(a, i, j, k, 1) - 2.0 * shifted(a, i, j, k, 0) + shifted(a, i, j, k, -1)) / (h(a) * h(a));
  }
  double fwd2(int a, int i, int j, int k) const {
    return (-3.0 * shifted(a, i, j, k, 0) + 4.0 * shifted(a, i, j, k, 1) - shifted(a, i, j, k, 2)) / (2.0 * h(a));
  }
  double bwd2(int a, int i, int j, int k) const {
    return (3.0 * shifted(a, i, j, k, 0) - 4.0 * shifted(a, i, j, k, -1) + shifted(a, i, j, k, -2)) / (2.0 * h(a));
  }

  // c * d/dx upwinded: second order when both upstream neighbours are strictly
  // inside the axis, first order on the layer next to the ends.
  double upwind(int a, int idx, int n, double c, int i, int j, int k) const {
    if (2 < idx && idx < n - 1) return pos(c) * fwd2(a, i, j, k) + neg(c) * bwd2(a, i, j, k);
    return pos(c) * fwd(a, i, j, k) + neg(c) * bwd(a, i, j, k);
  }

  // Transport term on a boundary-free axis (x or z): on the end nodes only the
  // inward one-sided difference is kept.
  double transport(int a, int idx, int n, double c, int i, int j, int k) const {
    if (idx == 1) return pos(c) * fwd2(a, i, j, k);
    if (idx == n) return neg(c) * bwd2(a, i, j, k);
    return upwind(a, idx, n, c, i, j, k);
  }

 private:
  const Grid& g_;
  const std::vector<double>& v_;
};

double oracle_row(const Grid& g, const ModelParams& p, const FieldOps& f, int i, int j, int k) {
  if (j == 1) return f.fwd(1, i, j, k);
  if (j == g.J()) return f.bwd(1, i, j, k);

  const double lambda = g.lambda();
  const double c = g.ys(j) / lambda;
  const double beta = drift_beta(g.xs(i) / lambda, g.ys(j) / lambda, g.zs(k) / lambda, p);
  const double ly = lambda * p.sigma * p.sigma / 2.0 * f.centred2(1, i, j, k) + f.upwind(1, j, g.J(), beta, i, j, k);
  const double sx = f.transport(0, i, g.I(), c, i, j, k);
  const double sz = f.transport(2, k, g.K(), c, i, j, k);
  return f.at(i, j, k) - (ly + sx + sz);
}

}  // namespace

CsrMatrix oracle_assemble(const Grid& grid, const ModelParams& p, double lambda) {
  check_lambda(grid, p, lambda);
  const std::size_t n = grid.size();
  std::vector<double> e(n, 0.0);
  const FieldOps ops(grid, e);
  std::vector<Triplet> triplets;
  for (std::size_t col = 0; col < n; ++col) {
    e[col] = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const NodeIndex v = grid.node(r);
      const double m = oracle_row(grid, p, ops, v.i, v.j, v.k);
      if (m != 0.0 || r == col) triplets.push_back({r, col, m});
    }
    e[col] = 0.0;
  }
  return csr_from_triplets(n, std::move(triplets));
}

std::vector<double> assemble_rhs(const Grid& grid, const Observable& g) {
  std::vector<double> rhs(grid.size(), 0.0);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    const NodeIndex v = grid.node(static_cast<std::size_t>(r));
    if (v.j == 1 || v.j == grid.J()) continue;
    rhs[static_cast<std::size_t>(r)] = g(grid.x(v.i), grid.y(v.j), grid.z(v.k));
  }
  return rhs;
}

SparseSystem assemble_system(const Grid& grid, const ModelParams& p, const Observable& g) {
  return {assemble_matrix(grid, p, grid.lambda()), assemble_rhs(grid, g)};
}

void export_matrix(std::ostream& os, const CsrMatrix& m) { write_coordinate(os, m); }

}  // namespace bepo
