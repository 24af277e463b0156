#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bepo/assembly.hpp"
#include "bepo/grid.hpp"
#include "bepo/sparse.hpp"

namespace bepo {

/// Unknown ordering used by the incomplete factorization.
///   Natural: the grid index order.
///   Upwind:  y-planes in turn; inside a plane, x and z run in the direction of
///            transport (increasing for y >= 0, decreasing for y < 0), which
///            makes the x/z transport block triangular.
enum class Ordering { Natural, Upwind };

std::string to_string(Ordering o);
Ordering ordering_from_string(const std::string& s);  // throws InvalidSpec

struct SolverConfig {
  double rel_tol = 1e-10;
  std::size_t max_iters = 5000;
  std::size_t restart = 60;
  double drop_tol = 1e-6;   // relative to the mean absolute entry of the input row
  std::size_t fill = 60;    // max entries kept per row in each of L and U
  double shift = 1e-2;      // relative diagonal shift used on a pivot breakdown retry
  Ordering ordering = Ordering::Upwind;
  bool deflate_constant = true;  // augment the Krylov space with the constant vector

  void validate() const;  // throws InvalidSpec
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// perm[new] = old for the Upwind ordering of `grid`.
std::vector<std::size_t> upwind_ordering(const Grid& grid);

/// Threshold incomplete LU factorization (dual dropping, Saad's ILUT) of
/// P A P^T for an optional symmetric permutation P.
class Ilut {
 public:
  Ilut() = default;
  /// `perm[new] = old`; empty means the identity. Throws PreconditionerBreakdown
  /// on a zero pivot.
  Ilut(const CsrMatrix& a, double drop_tol, std::size_t fill, double diag_shift = 0.0,
       std::vector<std::size_t> perm = {});

  /// x = P^T (LU)^{-1} P b; x and b may alias.
  void apply(std::span<const double> b, std::span<double> x) const;

  std::size_t nnz() const { return l_.nnz() + u_.nnz(); }
  std::size_t size() const { return u_.n; }

 private:
  void factor(const CsrMatrix& a, double drop_tol, std::size_t fill, double diag_shift);

  CsrMatrix l_;  // strictly lower, unit diagonal implied
  CsrMatrix u_;  // upper, diagonal first in each row
  std::vector<std::size_t> perm_;
};

struct GmresResult {
  std::size_t iterations = 0;
  double residual = 0.0;      // ||b - A x||, recomputed from x
  double rel_residual = 0.0;  // residual / ||b||
  bool converged = false;
};

/// Right-preconditioned restarted GMRES on A x = b from the initial guess in x.
/// A nonempty `deflate` vector u augments every cycle's search space with u
/// (residual kept orthogonal to A u), which removes a mode the preconditioner
/// resolves poorly; the resolvent solve passes the constant vector.
GmresResult gmres(const CsrMatrix& a, const Ilut& m, std::span<const double> b, std::span<double> x,
                  const SolverConfig& cfg, std::span<const double> deflate = {});

struct SolveReport {
  std::vector<double> v;  // lambda * u at the nodes
  double residual = 0.0;
  double rel_residual = 0.0;
  std::size_t iterations = 0;
  double statistic = 0.0;  // v at the centre node
  double spread = 0.0;     // max - min of v over the central half-box
  double max_abs = 0.0;    // ||v||_inf
  std::size_t fill_nnz = 0;
  bool shifted = false;     // preconditioner needed the diagonal-shift retry
};

/// Factors the matrix once and solves for any number of right-hand sides.
class ResolventSolver {
 public:
  /// `grid` supplies the ordering and the statistic/spread readout.
  ResolventSolver(CsrMatrix matrix, const Grid& grid, const SolverConfig& cfg);

  /// Throws NoConvergence.
  SolveReport solve(std::span<const double> rhs) const;

  const CsrMatrix& matrix() const { return a_; }
  const Grid& grid() const { return grid_; }
  bool shifted() const { return shifted_; }
  std::size_t preconditioner_nnz() const { return ilu_.nnz(); }

 private:
  CsrMatrix a_;
  Grid grid_;
  SolverConfig cfg_;
  Ilut ilu_;
  bool shifted_ = false;
};

SolveReport solve_resolvent(const SparseSystem& sys, const Grid& grid, const SolverConfig& cfg);

struct Statistic {
  double value;
  double spread;
};

/// Value at the centre node, plus max - min over nodes with |x| <= x_bar/2 and
/// |y| <= y_bar/2 (all z).
Statistic evaluate_statistic(std::span<const double> v, const Grid& grid);

/// Discrete form of ||lambda u|| <= ||g||: compares max |v| with
/// (1 + slack) max |g~| over the equation rows and locates the worst node.
struct BoundednessCheck {
  double max_v = 0.0;
  double max_g = 0.0;
  NodeIndex worst{};  // node of max |v|
  bool ok = true;
};
BoundednessCheck check_boundedness(std::span<const double> v, std::span<const double> rhs, const Grid& grid,
                                   double slack = 0.05);

/// `i,j,k,x,y,z,v` with unscaled coordinates.
void write_solution_csv(std::ostream& os, std::span<const double> v, const Grid& grid);
/// {"statistic":..,"spread":..,"residual":..,"iterations":..}
std::string solve_summary_json(const SolveReport& r);

}  // namespace bepo
