#pragma once

#include "h2se/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace h2se {

/// Collocation points with their quadrature weights (panel centroids and
/// panel areas for the BEM problems).
struct PointSet {
  std::vector<Vec3> coords;
  std::vector<double> weights;

  Index size() const { return static_cast<Index>(coords.size()); }
  void validate() const;
};

struct BoundingBox {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  double diameter() const { return (hi - lo).norm(); }
  int longest_axis() const;
  static BoundingBox of(std::span<const Vec3> points);
  static double distance(const BoundingBox& a, const BoundingBox& b);
};

struct ClusterNode {
  Index begin = 0;  // span into the tree permutation
  Index end = 0;
  int parent = -1;
  std::array<int, 2> children{-1, -1};
  int level = 0;
  BoundingBox bbox;

  Index size() const { return end - begin; }
  bool is_leaf() const { return children[0] < 0; }
};

/// Binary cluster tree over a point set.
///
/// Node ids are assigned breadth first, so every node's children have larger
/// ids than the node itself and nodes of one level occupy a contiguous id
/// range. `permutation()[pos]` is the original index stored at tree position
/// `pos`; every node owns the positions [begin, end).
class ClusterTree {
 public:
  ClusterTree() = default;
  /// Adopts an explicit topology (used by deserialization); validates it.
  ClusterTree(std::vector<ClusterNode> nodes, std::vector<Index> permutation,
              Index leaf_size);

  /// Longest-axis median bisection until a node holds at most `leaf_size`
  /// points. The lower half receives the extra point of an odd split.
  static ClusterTree build(const PointSet& points, Index leaf_size);

  Index size() const { return static_cast<Index>(permutation_.size()); }
  Index leaf_size() const { return leaf_size_; }
  /// Number of levels (1 for a single-node tree).
  int depth() const { return depth_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  const ClusterNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<ClusterNode>& nodes() const { return nodes_; }
  std::span<const Index> permutation() const { return permutation_; }
  std::span<const Index> inverse_permutation() const { return inverse_; }
  std::vector<int> leaves() const;

  /// Gathers `x` (original ordering) into tree ordering, and back.
  Vector to_tree_order(const Vector& x) const;
  Vector from_tree_order(const Vector& x) const;

 private:
  void finalize();

  std::vector<ClusterNode> nodes_;
  std::vector<Index> permutation_;
  std::vector<Index> inverse_;
  Index leaf_size_ = 1;
  int depth_ = 0;
};

struct BlockPair {
  int row = -1;
  int col = -1;
  friend bool operator==(const BlockPair&, const BlockPair&) = default;
};

/// Far (admissible, low rank) and close (dense) block pairs over a row and a
/// column tree. Far and close together tile the matrix exactly once.
struct BlockPartition {
  std::vector<BlockPair> far;
  std::vector<BlockPair> close;
  double eta = 1.0;
};

/// Strong admissibility: a pair is far when its boxes are separated and
/// max(diam_r, diam_c) <= eta * dist(box_r, box_c).
bool is_admissible(const BoundingBox& row, const BoundingBox& col, double eta);

/// Dual traversal from both roots. Admissible pairs become far leaves of the
/// block tree; inadmissible leaf-leaf pairs become close; otherwise the node
/// with the larger diameter is split (both when the diameters tie).
BlockPartition build_partition(const ClusterTree& rows, const ClusterTree& cols,
                               double eta = 1.0);

}  // namespace h2se
