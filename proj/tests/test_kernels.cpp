#include <doctest.h>

#include <cmath>
#include <random>

#include "bepo/assembly.hpp"
#include "bepo/parallel.hpp"
#include "bepo/sparse.hpp"

using namespace bepo;

TEST_SUITE("kernels") {
  TEST_CASE("triplets merge duplicates and drop cancelled off-diagonals") {
    const CsrMatrix m = csr_from_triplets(3, {{2, 0, 1.0}, {0, 1, 2.0}, {0, 1, -2.0}, {1, 1, 0.0}, {0, 0, 3.0},
                                              {2, 0, 0.5}, {2, 2, 1.0}});
    CHECK(m.n == 3);
    CHECK(m.at(0, 0) == 3.0);
    CHECK(m.row_end(0) - m.row_begin(0) == 1);  // (0, 1) cancelled
    CHECK(m.row_end(1) - m.row_begin(1) == 1);  // explicit zero diagonal kept
    CHECK(m.at(2, 0) == 1.5);
    CHECK(m.at(1, 2) == 0.0);
  }

  TEST_CASE("parallel kernels match their serial references bit for bit") {
    const Grid g(GridSpec{3.5, 3.5, 1.0, 1e-2, 33, 33, 33});
    const CsrMatrix m = assemble_matrix(g, ModelParams{}, g.lambda());
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> x(m.n), y(m.n), z(m.n);
    for (double& v : x) v = n(rng);
    spmv(m, x, y);
    spmv_serial(m, x, z);
    CHECK(y == z);
    CHECK(dot(x, y) == dot_serial(x, y));
    CHECK(norm2(x) == std::sqrt(dot_serial(x, x)));

    std::vector<double> w = y;
    axpy(0.5, x, w);
    for (std::size_t q = 0; q < w.size(); ++q) REQUIRE(w[q] == y[q] + 0.5 * x[q]);
  }

  TEST_CASE("reductions do not depend on the thread count") {
    std::vector<double> a(100'003), b(100'003);
    for (std::size_t q = 0; q < a.size(); ++q) a[q] = std::sin(double(q)), b[q] = std::cos(0.5 * q);
    const int saved = max_threads();
    set_threads(1);
    const double one = dot(a, b);
    set_threads(std::max(2, saved));
    const double many = dot(a, b);
    set_threads(saved);
    CHECK(one == many);
  }
}
