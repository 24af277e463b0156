#include "bepo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <queue>

#include "bepo/errors.hpp"
#include "bepo/parallel.hpp"

namespace bepo {

std::string to_string(Ordering o) { return o == Ordering::Natural ? "natural" : "upwind"; }

Ordering ordering_from_string(const std::string& s) {
  if (s == "natural") return Ordering::Natural;
  if (s == "upwind") return Ordering::Upwind;
  throw InvalidSpec("unknown ordering '" + s + "' (expected natural or upwind)");
}

void SolverConfig::validate() const {
  if (!(rel_tol > 0 && rel_tol < 1)) throw InvalidSpec("solver.rel_tol must lie in (0, 1)");
  if (restart < 1) throw InvalidSpec("solver.restart must be >= 1");
  if (max_iters < 1) throw InvalidSpec("solver.max_iters must be >= 1");
  if (!(drop_tol >= 0)) throw InvalidSpec("solver.drop_tol must be >= 0");
  if (fill < 1) throw InvalidSpec("solver.fill must be >= 1");
  if (!(shift > 0)) throw InvalidSpec("solver.shift must be > 0");
}

// ---------------------------------------------------------------------------
// ILUT

namespace {

// Keeps the `keep` largest-magnitude entries of (idx, w[idx]), then sorts by index.
void keep_largest(std::vector<std::size_t>& idx, const std::vector<double>& w, std::size_t keep) {
  if (idx.size() > keep) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                     [&](std::size_t a, std::size_t b) {
                       const double fa = std::abs(w[a]), fb = std::abs(w[b]);
                       return fa != fb ? fa > fb : a < b;
                     });
    idx.resize(keep);
  }
  std::sort(idx.begin(), idx.end());
}

}  // namespace

std::vector<std::size_t> upwind_ordering(const Grid& grid) {
  const int I = grid.I(), J = grid.J(), K = grid.K();
  std::vector<std::size_t> perm;
  perm.reserve(grid.size());
  for (int j = 1; j <= J; ++j) {
    const bool forward = grid.ys(j) >= 0.0;
    for (int a = 1; a <= I; ++a)
      for (int c = 1; c <= K; ++c)
        perm.push_back(forward ? grid.offset(a, j, c) : grid.offset(I + 1 - a, j, K + 1 - c));
  }
  return perm;
}

Ilut::Ilut(const CsrMatrix& a, double drop_tol, std::size_t fill, double diag_shift, std::vector<std::size_t> perm)
    : perm_(std::move(perm)) {
  if (perm_.empty()) {
    factor(a, drop_tol, fill, diag_shift);
    return;
  }
  if (perm_.size() != a.n) throw ShapeMismatch("ordering length differs from the matrix size");
  std::vector<std::size_t> inv(a.n, a.n);
  for (std::size_t q = 0; q < a.n; ++q) {
    if (perm_[q] >= a.n || inv[perm_[q]] != a.n) throw InvalidSpec("ordering is not a permutation");
    inv[perm_[q]] = q;
  }
  CsrMatrix b;
  b.n = a.n;
  b.row_ptr.assign(a.n + 1, 0);
  b.col.reserve(a.nnz());
  b.val.reserve(a.nnz());
  std::vector<std::pair<std::size_t, double>> row;
  for (std::size_t q = 0; q < a.n; ++q) {
    const std::size_t r = perm_[q];
    row.clear();
    for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) row.emplace_back(inv[a.col[p]], a.val[p]);
    std::sort(row.begin(), row.end());
    for (const auto& [c, v] : row) {
      b.col.push_back(c);
      b.val.push_back(v);
    }
    b.row_ptr[q + 1] = b.col.size();
  }
  factor(b, drop_tol, fill, diag_shift);
}

void Ilut::factor(const CsrMatrix& a, double drop_tol, std::size_t fill, double diag_shift) {
  const std::size_t n = a.n;
  l_.n = n;
  u_.n = n;
  l_.row_ptr.assign(n + 1, 0);
  u_.row_ptr.assign(n + 1, 0);
  l_.col.reserve(a.nnz() * 2);
  l_.val.reserve(a.nnz() * 2);
  u_.col.reserve(a.nnz() * 2);
  u_.val.reserve(a.nnz() * 2);

  std::vector<double> w(n, 0.0);
  std::vector<char> used(n, 0);
  std::vector<std::size_t> upper;   // columns > i currently nonzero in w
  std::vector<std::size_t> lower_kept;
  std::vector<std::size_t> touched;
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> lower;

  for (std::size_t i = 0; i < n; ++i) {
    double tnorm = 0.0;
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) tnorm += std::abs(a.val[p]);
    const std::size_t len = a.row_ptr[i + 1] - a.row_ptr[i];
    if (len == 0 || tnorm == 0.0) throw PreconditionerBreakdown("empty matrix row " + std::to_string(i + 1));
    tnorm /= static_cast<double>(len);
    const double tol = drop_tol * tnorm;

    upper.clear();
    lower_kept.clear();
    touched.clear();
    w[i] = 0.0;
    used[i] = 1;
    touched.push_back(i);
    for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const std::size_t c = a.col[p];
      w[c] = a.val[p];
      if (c != i) touched.push_back(c);
      if (c < i) {
        used[c] = 1;
        lower.push(c);
      } else if (c > i) {
        used[c] = 1;
        upper.push_back(c);
      }
    }
    if (diag_shift > 0.0) {
      const double d = w[i];
      w[i] += (d != 0.0 ? diag_shift * std::abs(d) * (d > 0 ? 1.0 : -1.0) : diag_shift * tnorm);
    }

    // Eliminate with previous U rows in increasing column order.
    while (!lower.empty()) {
      const std::size_t k = lower.top();
      lower.pop();
      const std::size_t ubeg = u_.row_ptr[k];
      const double fact = w[k] / u_.val[ubeg];
      if (std::abs(fact) <= tol) continue;
      w[k] = fact;
      lower_kept.push_back(k);
      for (std::size_t p = ubeg + 1; p < u_.row_ptr[k + 1]; ++p) {
        const std::size_t c = u_.col[p];
        if (!used[c]) {
          used[c] = 1;
          touched.push_back(c);
          w[c] = 0.0;
          if (c < i)
            lower.push(c);
          else if (c > i)
            upper.push_back(c);
        }
        w[c] -= fact * u_.val[p];
      }
    }

    keep_largest(lower_kept, w, fill);
    for (std::size_t c : lower_kept) {
      l_.col.push_back(c);
      l_.val.push_back(w[c]);
    }
    l_.row_ptr[i + 1] = l_.val.size();

    const double pivot = w[i];
    if (!std::isfinite(pivot) || std::abs(pivot) <= 1e-14 * tnorm)
      throw PreconditionerBreakdown("zero pivot in incomplete factorization at row " + std::to_string(i + 1));

    std::vector<std::size_t>& kept = upper;
    std::erase_if(kept, [&](std::size_t c) { return std::abs(w[c]) <= tol; });
    keep_largest(kept, w, fill);
    u_.col.push_back(i);
    u_.val.push_back(pivot);
    for (std::size_t c : kept) {
      u_.col.push_back(c);
      u_.val.push_back(w[c]);
    }
    u_.row_ptr[i + 1] = u_.val.size();

    for (std::size_t c : touched) {
      w[c] = 0.0;
      used[c] = 0;
    }
  }
}

void Ilut::apply(std::span<const double> b, std::span<double> x) const {
  const std::size_t n = u_.n;
  std::vector<double> permuted;
  std::span<double> y = x;
  if (!perm_.empty()) {
    permuted.resize(n);
    for (std::size_t q = 0; q < n; ++q) permuted[q] = b[perm_[q]];
    y = permuted;
  } else if (x.data() != b.data()) {
    std::copy(b.begin(), b.end(), x.begin());
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t p = l_.row_ptr[i]; p < l_.row_ptr[i + 1]; ++p) s -= l_.val[p] * y[l_.col[p]];
    y[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t beg = u_.row_ptr[i];
    double s = y[i];
    for (std::size_t p = beg + 1; p < u_.row_ptr[i + 1]; ++p) s -= u_.val[p] * y[u_.col[p]];
    y[i] = s / u_.val[beg];
  }
  if (!perm_.empty())
    for (std::size_t q = 0; q < n; ++q) x[perm_[q]] = y[q];
}

// ---------------------------------------------------------------------------
// GMRES

GmresResult gmres(const CsrMatrix& a, const Ilut& m, std::span<const double> b, std::span<double> x,
                  const SolverConfig& cfg, std::span<const double> deflate) {
  const std::size_t n = a.n;
  const std::size_t restart = cfg.restart;
  GmresResult res;

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  const double target = cfg.rel_tol * bnorm;

  std::vector<std::vector<double>> basis(restart + 1, std::vector<double>(n));
  std::vector<double> h((restart + 1) * restart, 0.0);
  auto H = [&](std::size_t r, std::size_t c) -> double& { return h[r * restart + c]; };
  std::vector<double> cs(restart), sn(restart), g(restart + 1), y(restart);
  std::vector<double> r(n), z(n), w(n);

  // Augmentation vector u with c = A u scaled to unit length. Each cycle keeps
  // the residual orthogonal to c and minimizes over x + span{u} + M^{-1} K_m.
  std::vector<double> du, dc, bc(restart, 0.0);
  if (!deflate.empty()) {
    if (deflate.size() != n) throw ShapeMismatch("deflation vector length differs from the matrix size");
    du.assign(deflate.begin(), deflate.end());
    dc.resize(n);
    spmv(a, du, dc);
    const double gamma = norm2(dc);
    if (gamma > 0.0) {
      for (std::size_t q = 0; q < n; ++q) {
        du[q] /= gamma;
        dc[q] /= gamma;
      }
    } else {
      du.clear();
      dc.clear();
    }
  }
  const bool deflating = !dc.empty();

  auto true_residual = [&]() {
    spmv(a, x, r);
    for (std::size_t q = 0; q < n; ++q) r[q] = b[q] - r[q];
    return norm2(r);
  };

  // Near the rounding floor the recurrence residual of a cycle runs ahead of
  // the true one; when a cycle stops early on the recurrence but the true
  // residual misses the target, later cycles use a tighter inner target.
  double inner_target = target;
  int stalled_cycles = 0;

  double rnorm = true_residual();
  while (true) {
    if (rnorm <= target) {
      res.converged = true;
      break;
    }
    if (res.iterations >= cfg.max_iters) break;

    double cycle_norm = rnorm;
    if (deflating) {
      const double alpha = dot(dc, r);
      axpy(alpha, du, x);
      axpy(-alpha, dc, r);
      cycle_norm = norm2(r);
      if (cycle_norm <= target) {
        rnorm = true_residual();
        if (rnorm <= target) continue;
        cycle_norm = rnorm;
      }
    }
    for (std::size_t q = 0; q < n; ++q) basis[0][q] = r[q] / cycle_norm;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = cycle_norm;

    std::size_t used = 0;
    for (std::size_t j = 0; j < restart; ++j) {
      m.apply(basis[j], z);
      spmv(a, z, w);
      if (deflating) {
        bc[j] = dot(dc, w);
        axpy(-bc[j], dc, w);
      }
      for (std::size_t i = 0; i <= j; ++i) {
        H(i, j) = dot(w, basis[i]);
        axpy(-H(i, j), basis[i], w);
      }
      const double hn = norm2(w);
      H(j + 1, j) = hn;
      if (hn != 0.0)
        for (std::size_t q = 0; q < n; ++q) basis[j + 1][q] = w[q] / hn;

      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = denom == 0.0 ? 1.0 : H(j, j) / denom;
      sn[j] = denom == 0.0 ? 0.0 : H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      ++res.iterations;
      used = j + 1;
      if (std::abs(g[j + 1]) <= inner_target || hn == 0.0 || res.iterations >= cfg.max_iters) break;
    }

    // Back substitution and update x += M^{-1} V y.
    for (std::size_t i = used; i-- > 0;) {
      double s = g[i];
      for (std::size_t c = i + 1; c < used; ++c) s -= H(i, c) * y[c];
      y[i] = H(i, i) != 0.0 ? s / H(i, i) : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < used; ++i) axpy(y[i], basis[i], w);
    m.apply(w, z);
    axpy(1.0, z, x);
    if (deflating) {
      double t = 0.0;
      for (std::size_t i = 0; i < used; ++i) t += bc[i] * y[i];
      axpy(-t, du, x);
    }

    const double previous = rnorm;
    rnorm = true_residual();
    if (rnorm > target) {
      if (used < restart) inner_target *= 0.1;
      stalled_cycles = rnorm < previous ? 0 : stalled_cycles + 1;
      if (stalled_cycles >= 3) break;  // at the attainable accuracy
    }
  }

  res.residual = rnorm;
  res.rel_residual = rnorm / bnorm;
  res.converged = rnorm <= target;
  return res;
}

// ---------------------------------------------------------------------------

ResolventSolver::ResolventSolver(CsrMatrix matrix, const Grid& grid, const SolverConfig& cfg)
    : a_(std::move(matrix)), grid_(grid), cfg_(cfg) {
  cfg_.validate();
  if (grid_.size() != a_.n) throw ShapeMismatch("grid size differs from the matrix size");
  for (std::size_t r = 0; r < a_.n; ++r)
    if (a_.diagonal(r) == 0.0) throw InvalidSpec("matrix row " + std::to_string(r + 1) + " has a zero diagonal");
  const auto order = [&] {
    return cfg_.ordering == Ordering::Upwind ? upwind_ordering(grid_) : std::vector<std::size_t>{};
  };
  try {
    ilu_ = Ilut(a_, cfg_.drop_tol, cfg_.fill, 0.0, order());
  } catch (const PreconditionerBreakdown&) {
    ilu_ = Ilut(a_, cfg_.drop_tol, cfg_.fill, cfg_.shift, order());
    shifted_ = true;
  }
}

SolveReport ResolventSolver::solve(std::span<const double> rhs) const {
  if (rhs.size() != a_.n) throw ShapeMismatch("right-hand side length differs from the matrix size");
  SolveReport rep;
  rep.v.assign(a_.n, 0.0);
  std::vector<double> ones;
  if (cfg_.deflate_constant) ones.assign(a_.n, 1.0);
  const GmresResult g = gmres(a_, ilu_, rhs, rep.v, cfg_, ones);
  if (!g.converged) throw NoConvergence(g.iterations, g.rel_residual);
  rep.residual = g.residual;
  rep.rel_residual = g.rel_residual;
  rep.iterations = g.iterations;
  const Statistic s = evaluate_statistic(rep.v, grid_);
  rep.statistic = s.value;
  rep.spread = s.spread;
  for (double v : rep.v) rep.max_abs = std::max(rep.max_abs, std::abs(v));
  rep.fill_nnz = ilu_.nnz();
  rep.shifted = shifted_;
  return rep;
}

SolveReport solve_resolvent(const SparseSystem& sys, const Grid& grid, const SolverConfig& cfg) {
  const ResolventSolver solver(sys.matrix, grid, cfg);
  return solver.solve(sys.rhs);
}

Statistic evaluate_statistic(std::span<const double> v, const Grid& grid) {
  if (v.size() != grid.size()) throw ShapeMismatch("solution length differs from the grid size");
  const NodeIndex c = grid.center();
  double lo = v[grid.offset(c.i, c.j, c.k)], hi = lo;
  for (int i = 1; i <= grid.I(); ++i) {
    if (4 * std::abs(i - c.i) > grid.I() - 1) continue;
    for (int j = 1; j <= grid.J(); ++j) {
      if (4 * std::abs(j - c.j) > grid.J() - 1) continue;
      for (int k = 1; k <= grid.K(); ++k) {
        const double x = v[grid.offset(i, j, k)];
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
    }
  }
  return {v[grid.offset(c.i, c.j, c.k)], hi - lo};
}

BoundednessCheck check_boundedness(std::span<const double> v, std::span<const double> rhs, const Grid& grid,
                                   double slack) {
  if (v.size() != grid.size() || rhs.size() != grid.size()) throw ShapeMismatch("vector length differs from the grid size");
  BoundednessCheck c;
  std::size_t worst = 0;
  for (std::size_t q = 0; q < v.size(); ++q) {
    if (std::abs(v[q]) > c.max_v) {
      c.max_v = std::abs(v[q]);
      worst = q;
    }
    c.max_g = std::max(c.max_g, std::abs(rhs[q]));  // zero on the y-boundary rows
  }
  c.worst = grid.node(worst);
  c.ok = c.max_v <= (1.0 + slack) * c.max_g;
  return c;
}

void write_solution_csv(std::ostream& os, std::span<const double> v, const Grid& grid) {
  os << "i,j,k,x,y,z,v\n";
  char buf[160];
  for (int i = 1; i <= grid.I(); ++i)
    for (int j = 1; j <= grid.J(); ++j)
      for (int k = 1; k <= grid.K(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.10g,%.10g,%.10g,%.12g\n", i, j, k, grid.x(i), grid.y(j), grid.z(k),
                      v[grid.offset(i, j, k)]);
        os << buf;
      }
}

std::string solve_summary_json(const SolveReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "{\"statistic\":%.12g,\"spread\":%.6g,\"residual\":%.6g,\"iterations\":%zu}",
                r.statistic, r.spread, r.rel_residual, r.iterations);
  return buf;
}

}  // namespace bepo
