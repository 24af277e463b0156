#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace bepo {

/// Truncated box [-x_bar, x_bar] x [-y_bar, y_bar] x [-b, b], discretized after
/// the scaling x~ = lambda x (likewise y, z). Node counts are odd so the origin
/// is a node.
struct GridSpec {
  double x_bar = 3.5;
  double y_bar = 3.5;
  double b = 1.0;
  double lambda = 1e-3;
  int I = 129;
  int J = 129;
  int K = 129;

  void validate() const;  // throws InvalidSpec
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class NodeClass {
  Interior,    // K
  FaceZMinus,  // R-
  FaceZPlus,   // R+
  FaceXMinus,  // B-
  FaceXPlus,   // B+
  EdgeXMinus,  // B^-  (i = 1, k in {1, K})
  EdgeXPlus,   // B^+  (i = I, k in {1, K})
  NeumannY,    // G    (j in {1, J})
};

inline constexpr std::array<NodeClass, 8> kAllNodeClasses = {
    NodeClass::Interior,   NodeClass::FaceZMinus, NodeClass::FaceZPlus,  NodeClass::FaceXMinus,
    NodeClass::FaceXPlus,  NodeClass::EdgeXMinus, NodeClass::EdgeXPlus,  NodeClass::NeumannY};

std::string_view to_string(NodeClass c);

/// 1-based node triple.
struct NodeIndex {
  int i = 1, j = 1, k = 1;
  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// l(i, j, k) = k + (j-1) K + (i-1) J K, 1-based. Throws OutOfRange.
std::size_t index_of(int i, int j, int k, int I, int J, int K);

/// Inverse of index_of. Throws OutOfRange.
NodeIndex node_of(std::size_t l, int I, int J, int K);

/// Throws OutOfRange on indices outside the grid.
NodeClass classify_node(int i, int j, int k, int I, int J, int K);

class Grid {
 public:
  explicit Grid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int I() const { return spec_.I; }
  int J() const { return spec_.J; }
  int K() const { return spec_.K; }
  double lambda() const { return spec_.lambda; }
  std::size_t size() const { return static_cast<std::size_t>(spec_.I) * spec_.J * spec_.K; }

  // Scaled spacings.
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double dz() const { return dz_; }

  // Scaled node coordinates, 1-based index.
  double xs(int i) const { return xs_[static_cast<std::size_t>(i - 1)]; }
  double ys(int j) const { return ys_[static_cast<std::size_t>(j - 1)]; }
  double zs(int k) const { return zs_[static_cast<std::size_t>(k - 1)]; }

  // Unscaled node coordinates (scaled / lambda).
  double x(int i) const { return xu_[static_cast<std::size_t>(i - 1)]; }
  double y(int j) const { return yu_[static_cast<std::size_t>(j - 1)]; }
  double z(int k) const { return zu_[static_cast<std::size_t>(k - 1)]; }

  /// 0-based storage offset of a 1-based node; unchecked.
  std::size_t offset(int i, int j, int k) const {
    return static_cast<std::size_t>(k - 1) +
           static_cast<std::size_t>(j - 1) * spec_.K +
           static_cast<std::size_t>(i - 1) * spec_.J * spec_.K;
  }
  NodeIndex node(std::size_t offset) const;

  NodeClass classify(int i, int j, int k) const { return classify_node(i, j, k, spec_.I, spec_.J, spec_.K); }
  NodeIndex center() const { return {(spec_.I + 1) / 2, (spec_.J + 1) / 2, (spec_.K + 1) / 2}; }

  /// Offset of the node mirrored through the origin.
  std::size_t reflect(std::size_t offset) const;

 private:
  GridSpec spec_;
  double dx_, dy_, dz_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<double> xu_, yu_, zu_;
};

}  // namespace bepo
