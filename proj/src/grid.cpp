#include "bepo/grid.hpp"

#include <cmath>
#include <string>

#include "bepo/errors.hpp"

namespace bepo {

namespace {

bool odd_above_one(int n) { return n > 1 && n % 2 == 1; }

// Node m steps from the center sits at m * h. Written this way the axis is
// symmetric bit-for-bit and halving h keeps every coarse node on the fine axis.
void fill_axis(int n, double half_width, double lambda, double& h, std::vector<double>& scaled,
               std::vector<double>& unscaled) {
  h = 2.0 * lambda * half_width / (n - 1);
  const int c = (n + 1) / 2;
  scaled.resize(static_cast<std::size_t>(n));
  unscaled.resize(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    scaled[i - 1] = (i - c) * h;
    unscaled[i - 1] = scaled[i - 1] / lambda;
  }
}

}  // namespace

void GridSpec::validate() const {
  if (!odd_above_one(I) || !odd_above_one(J) || !odd_above_one(K))
    throw InvalidSpec("node counts I, J, K must be odd integers > 1 (got " + std::to_string(I) + ", " +
                      std::to_string(J) + ", " + std::to_string(K) + ")");
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidSpec("lambda must be > 0");
  if (!(x_bar > 0) || !(y_bar > 0) || !(b > 0)) throw InvalidSpec("truncation half-widths must be > 0");
}

std::string_view to_string(NodeClass c) {
  switch (c) {
    case NodeClass::Interior: return "interior";
    case NodeClass::FaceZMinus: return "face_z_minus";
    case NodeClass::FaceZPlus: return "face_z_plus";
    case NodeClass::FaceXMinus: return "face_x_minus";
    case NodeClass::FaceXPlus: return "face_x_plus";
    case NodeClass::EdgeXMinus: return "edge_x_minus";
    case NodeClass::EdgeXPlus: return "edge_x_plus";
    case NodeClass::NeumannY: return "neumann_y";
  }
  return "?";
}

std::size_t index_of(int i, int j, int k, int I, int J, int K) {
  if (i < 1 || i > I || j < 1 || j > J || k < 1 || k > K)
    throw OutOfRange("node (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) +
                     ") outside grid");
  return static_cast<std::size_t>(k) + static_cast<std::size_t>(j - 1) * K +
         static_cast<std::size_t>(i - 1) * J * K;
}

NodeIndex node_of(std::size_t l, int I, int J, int K) {
  const std::size_t n = static_cast<std::size_t>(I) * J * K;
  if (l < 1 || l > n) throw OutOfRange("linear index " + std::to_string(l) + " outside [1, IJK]");
  const std::size_t r = l - 1;
  return {static_cast<int>(r / (static_cast<std::size_t>(J) * K)) + 1,
          static_cast<int>((r / K) % J) + 1, static_cast<int>(r % K) + 1};
}

NodeClass classify_node(int i, int j, int k, int I, int J, int K) {
  if (i < 1 || i > I || j < 1 || j > J || k < 1 || k > K) throw OutOfRange("node outside grid");
  if (j == 1 || j == J) return NodeClass::NeumannY;
  const bool zface = (k == 1 || k == K);
  if (i == 1) return zface ? NodeClass::EdgeXMinus : NodeClass::FaceXMinus;
  if (i == I) return zface ? NodeClass::EdgeXPlus : NodeClass::FaceXPlus;
  if (k == 1) return NodeClass::FaceZMinus;
  if (k == K) return NodeClass::FaceZPlus;
  return NodeClass::Interior;
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  fill_axis(spec_.I, spec_.x_bar, spec_.lambda, dx_, xs_, xu_);
  fill_axis(spec_.J, spec_.y_bar, spec_.lambda, dy_, ys_, yu_);
  fill_axis(spec_.K, spec_.b, spec_.lambda, dz_, zs_, zu_);
}

NodeIndex Grid::node(std::size_t off) const { return node_of(off + 1, spec_.I, spec_.J, spec_.K); }

std::size_t Grid::reflect(std::size_t off) const {
  const NodeIndex n = node(off);
  return offset(spec_.I + 1 - n.i, spec_.J + 1 - n.j, spec_.K + 1 - n.k);
}

}  // namespace bepo
