#pragma once

#include "h2se/experiment.hpp"
#include "h2se/geometry.hpp"
#include "h2se/h2matrix.hpp"
#include "h2se/kernels.hpp"
#include "h2se/rng.hpp"
#include "h2se/seform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <numbers>

namespace testing {

using namespace h2se;

struct Fixture {
  TriangleMesh mesh;
  Matrix dense;
  std::shared_ptr<const ClusterTree> tree;
  BlockPartition partition;
  std::shared_ptr<const H2Matrix> h2;
};

/// Kernel matrix written out from the formulas, independently of assemble_dense.
inline Matrix kernel_oracle(const TriangleMesh& mesh, KernelKind kind) {
  const Index n = mesh.size();
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double w = mesh.areas[static_cast<std::size_t>(j)];
      if (i == j) {
        const double radius = std::sqrt(w / std::numbers::pi);
        a(i, j) = kind == KernelKind::single_layer ? 2.0 * std::numbers::pi * radius : -2.0 * std::numbers::pi / radius;
      } else {
        const double r = (mesh.centroids[static_cast<std::size_t>(i)] - mesh.centroids[static_cast<std::size_t>(j)]).norm();
        a(i, j) = w / (kind == KernelKind::single_layer ? r : r * r * r);
      }
    }
  }
  return a;
}

inline TriangleMesh mesh_for(KernelKind kind, int n) {
  return kind == KernelKind::single_layer ? make_unit_square_mesh(n) : make_open_surface_mesh(n);
}

inline Fixture make_fixture(KernelKind kind, int n_mesh, double tol = 1e-6, Index leaf_size = 25,
                            double eta = 1.0) {
  Fixture f;
  f.mesh = mesh_for(kind, n_mesh);
  f.dense = assemble_dense(f.mesh, Kernel{kind});
  f.tree = std::make_shared<const ClusterTree>(ClusterTree::build(f.mesh.points(), leaf_size));
  f.partition = build_partition(*f.tree, *f.tree, eta);
  H2BuildOptions options;
  options.tol = tol;
  f.h2 = std::make_shared<const H2Matrix>(build_h2_dense(f.dense, f.tree, f.tree, f.partition, options));
  return f;
}

inline std::shared_ptr<const H2Matrix> h2_from(const Matrix& dense, const PointSet& points, Index leaf_size,
                                                double eta, H2BuildOptions options) {
  auto tree = std::make_shared<const ClusterTree>(ClusterTree::build(points, leaf_size));
  const BlockPartition part = build_partition(*tree, *tree, eta);
  return std::make_shared<const H2Matrix>(build_h2_dense(dense, tree, tree, part, options));
}

inline PointSet random_points(Index n, std::uint64_t seed, bool planar = false) {
  SplitMix64 rng(seed);
  PointSet p;
  for (Index i = 0; i < n; ++i) {
    const double x = rng.uniform(), y = rng.uniform();
    p.coords.emplace_back(x, y, planar ? 0.0 : rng.uniform());
    p.weights.push_back(1.0);
  }
  return p;
}

inline double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }
inline double rel_err(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

inline Vector dense_solve(const Matrix& a, const Vector& y) { return a.fullPivLu().solve(y); }

/// Eliminates every extended unknown from H: H11 - H12 H22^{-1} H21.
inline Matrix schur_eliminate(const Matrix& h, Index n) {
  const Index m = h.rows() - n;
  if (m == 0) return h;
  const Matrix h22_inv_h21 = h.bottomRightCorner(m, m).fullPivLu().solve(h.bottomLeftCorner(m, n));
  return h.topLeftCorner(n, n) - h.topRightCorner(n, m) * h22_inv_h21;
}

/// Number of blocks covering every (i, j), counted by scanning each pair.
inline Eigen::MatrixXi coverage(const ClusterTree& rows, const ClusterTree& cols, const BlockPartition& p) {
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(rows.size(), cols.size());
  auto mark = [&](const BlockPair& b) {
    const ClusterNode& r = rows.node(b.row);
    const ClusterNode& c = cols.node(b.col);
    for (Index i = r.begin; i < r.end; ++i)
      for (Index j = c.begin; j < c.end; ++j) ++count(rows.permutation()[i], cols.permutation()[j]);
  };
  for (const BlockPair& b : p.far) mark(b);
  for (const BlockPair& b : p.close) mark(b);
  return count;
}

/// Singular values by one-sided Jacobi, independent of the library's BDCSVD.
inline double jacobi_condition(const Matrix& m) {
  const Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  return s[s.size() - 1] > 0.0 ? s[0] / s[s.size() - 1] : INFINITY;
}

// Rows of the far field of column node t: every far pair whose column is t or
// one of its ancestors, restricted to the columns owned by t (tree order).
inline Matrix column_strip(const Matrix& dense, const H2Matrix& a, int t) {
  const ClusterTree& rows = a.row_tree();
  const ClusterTree& cols = a.col_tree();
  const ClusterNode& node = cols.node(t);
  std::vector<Index> row_ids;
  for (int s = t; s >= 0; s = cols.node(s).parent)
    for (const BlockPair& p : a.partition().far)
      if (p.col == s)
        for (Index i = rows.node(p.row).begin; i < rows.node(p.row).end; ++i) row_ids.push_back(rows.permutation()[i]);
  Matrix strip(static_cast<Index>(row_ids.size()), node.size());
  for (std::size_t r = 0; r < row_ids.size(); ++r)
    for (Index j = 0; j < node.size(); ++j) strip(static_cast<Index>(r), j) = dense(row_ids[r], cols.permutation()[node.begin + j]);
  return strip;
}

inline Matrix polynomial_kernel(const PointSet& p) {
  const Index n = p.size();
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double d = 1.0 + p.coords[static_cast<std::size_t>(i)].dot(p.coords[static_cast<std::size_t>(j)]);
      a(i, j) = d * d;
    }
  return a;
}

}  // namespace testing
