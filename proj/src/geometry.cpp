#include "h2se/geometry.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace h2se {

void PointSet::validate() const {
  require(!coords.empty(), "point set is empty");
  require(coords.size() == weights.size(), "point set: coords and weights differ in length");
  for (double w : weights) require(w > 0.0, "point set: weights must be strictly positive");
}

int BoundingBox::longest_axis() const {
  Vec3 extent = hi - lo;
  int axis = 0;
  for (int a = 1; a < 3; ++a)
    if (extent[a] > extent[axis]) axis = a;
  return axis;
}

BoundingBox BoundingBox::of(std::span<const Vec3> points) {
  BoundingBox box;
  if (points.empty()) return box;
  box.lo = box.hi = points.front();
  for (const Vec3& p : points) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

double BoundingBox::distance(const BoundingBox& a, const BoundingBox& b) {
  Vec3 gap = (a.lo - b.hi).cwiseMax(b.lo - a.hi).cwiseMax(Vec3::Zero());
  return gap.norm();
}

ClusterTree::ClusterTree(std::vector<ClusterNode> nodes, std::vector<Index> permutation,
                         Index leaf_size)
    : nodes_(std::move(nodes)), permutation_(std::move(permutation)), leaf_size_(leaf_size) {
  require(!nodes_.empty(), "cluster tree: no nodes");
  require(leaf_size_ >= 1, "cluster tree: leaf_size must be positive");
  const Index n = size();
  require(nodes_[0].begin == 0 && nodes_[0].end == n && nodes_[0].parent == -1,
          "cluster tree: root must cover every index");
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const ClusterNode& node = nodes_[id];
    require(node.begin <= node.end, "cluster tree: inverted index range");
    if (node.is_leaf()) {
      require(node.children[1] < 0, "cluster tree: nodes have zero or two children");
      require(node.size() <= leaf_size_, "cluster tree: leaf exceeds leaf_size");
      continue;
    }
    const auto [a, b] = node.children;
    require(a > static_cast<int>(id) && b > static_cast<int>(id) &&
                b < static_cast<int>(nodes_.size()),
            "cluster tree: child ids must follow their parent");
    const ClusterNode& left = nodes_[static_cast<std::size_t>(a)];
    const ClusterNode& right = nodes_[static_cast<std::size_t>(b)];
    require(left.parent == static_cast<int>(id) && right.parent == static_cast<int>(id),
            "cluster tree: parent links disagree with children");
    require(left.begin == node.begin && left.end == right.begin && right.end == node.end,
            "cluster tree: children must partition the parent range");
    require(left.level == node.level + 1 && right.level == node.level + 1,
            "cluster tree: levels must increase by one per edge");
  }
  finalize();
}

void ClusterTree::finalize() {
  const Index n = size();
  inverse_.assign(static_cast<std::size_t>(n), -1);
  for (Index pos = 0; pos < n; ++pos) {
    Index original = permutation_[static_cast<std::size_t>(pos)];
    require(original >= 0 && original < n && inverse_[static_cast<std::size_t>(original)] < 0,
            "cluster tree: permutation is not a bijection");
    inverse_[static_cast<std::size_t>(original)] = pos;
  }
  depth_ = 0;
  for (const ClusterNode& node : nodes_) depth_ = std::max(depth_, node.level + 1);
}

ClusterTree ClusterTree::build(const PointSet& points, Index leaf_size) {
  points.validate();
  require(leaf_size >= 1, "cluster tree: leaf_size must be positive");

  ClusterTree tree;
  tree.leaf_size_ = leaf_size;
  const Index n = points.size();
  tree.permutation_.resize(static_cast<std::size_t>(n));
  std::iota(tree.permutation_.begin(), tree.permutation_.end(), Index{0});

  auto bbox_of = [&](Index begin, Index end) {
    BoundingBox box;
    box.lo = box.hi = points.coords[static_cast<std::size_t>(tree.permutation_[begin])];
    for (Index k = begin; k < end; ++k) {
      const Vec3& p = points.coords[static_cast<std::size_t>(tree.permutation_[k])];
      box.lo = box.lo.cwiseMin(p);
      box.hi = box.hi.cwiseMax(p);
    }
    return box;
  };

  ClusterNode root;
  root.begin = 0;
  root.end = n;
  root.bbox = bbox_of(0, n);
  tree.nodes_.push_back(root);

  // Breadth-first so that ids grow level by level.
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int id = queue.front();
    queue.pop_front();
    const ClusterNode node = tree.nodes_[static_cast<std::size_t>(id)];
    if (node.size() <= leaf_size) continue;

    const int axis = node.bbox.longest_axis();
    auto first = tree.permutation_.begin() + node.begin;
    auto last = tree.permutation_.begin() + node.end;
    std::sort(first, last, [&](Index a, Index b) {
      double ca = points.coords[static_cast<std::size_t>(a)][axis];
      double cb = points.coords[static_cast<std::size_t>(b)][axis];
      return ca < cb || (ca == cb && a < b);
    });
    const Index mid = node.begin + (node.size() + 1) / 2;

    for (int side = 0; side < 2; ++side) {
      ClusterNode child;
      child.begin = side == 0 ? node.begin : mid;
      child.end = side == 0 ? mid : node.end;
      child.parent = id;
      child.level = node.level + 1;
      child.bbox = bbox_of(child.begin, child.end);
      tree.nodes_[static_cast<std::size_t>(id)].children[static_cast<std::size_t>(side)] =
          static_cast<int>(tree.nodes_.size());
      queue.push_back(static_cast<int>(tree.nodes_.size()));
      tree.nodes_.push_back(child);
    }
  }
  tree.finalize();
  return tree;
}

std::vector<int> ClusterTree::leaves() const {
  std::vector<int> out;
  for (int id = 0; id < node_count(); ++id)
    if (nodes_[static_cast<std::size_t>(id)].is_leaf()) out.push_back(id);
  return out;
}

Vector ClusterTree::to_tree_order(const Vector& x) const {
  require(x.size() == size(), "cluster tree: vector length mismatch");
  Vector out(size());
  for (Index pos = 0; pos < size(); ++pos) out[pos] = x[permutation_[static_cast<std::size_t>(pos)]];
  return out;
}

Vector ClusterTree::from_tree_order(const Vector& x) const {
  require(x.size() == size(), "cluster tree: vector length mismatch");
  Vector out(size());
  for (Index pos = 0; pos < size(); ++pos) out[permutation_[static_cast<std::size_t>(pos)]] = x[pos];
  return out;
}

bool is_admissible(const BoundingBox& row, const BoundingBox& col, double eta) {
  const double dist = BoundingBox::distance(row, col);
  // Touching or overlapping boxes are never far, even with zero diameters.
  if (!(dist > 0.0)) return false;
  return std::max(row.diameter(), col.diameter()) <= eta * dist;
}

namespace {

void traverse(const ClusterTree& rows, const ClusterTree& cols, int r, int c, double eta,
              BlockPartition& out) {
  const ClusterNode& rn = rows.node(r);
  const ClusterNode& cn = cols.node(c);
  if (is_admissible(rn.bbox, cn.bbox, eta)) {
    out.far.push_back({r, c});
    return;
  }
  if (rn.is_leaf() && cn.is_leaf()) {
    out.close.push_back({r, c});
    return;
  }
  const double dr = rn.bbox.diameter();
  const double dc = cn.bbox.diameter();
  const bool split_row = !rn.is_leaf() && (cn.is_leaf() || dr >= dc);
  const bool split_col = !cn.is_leaf() && (rn.is_leaf() || dc >= dr);
  if (split_row && split_col) {
    for (int rc : rn.children)
      for (int cc : cn.children) traverse(rows, cols, rc, cc, eta, out);
  } else if (split_row) {
    for (int rc : rn.children) traverse(rows, cols, rc, c, eta, out);
  } else {
    for (int cc : cn.children) traverse(rows, cols, r, cc, eta, out);
  }
}

}  // namespace

BlockPartition build_partition(const ClusterTree& rows, const ClusterTree& cols, double eta) {
  require(eta > 0.0, "partition: eta must be positive");
  require(rows.node_count() > 0 && cols.node_count() > 0, "partition: empty cluster tree");
  BlockPartition partition;
  partition.eta = eta;
  traverse(rows, cols, 0, 0, eta, partition);
  return partition;
}

}  // namespace h2se
