#include "h2se/h2matrix.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>

namespace h2se {

namespace {

/// Truncation count for singular values sorted descending.
Index truncated_rank(const Vector& sigma, double tol, Index cap) {
  if (sigma.size() == 0 || !(sigma[0] > 0.0)) return 0;
  Index k = 0;
  while (k < sigma.size() && sigma[k] > 0.0 && sigma[k] >= tol * sigma[0]) ++k;
  return std::min(k, cap);
}

struct RightSvd {
  Vector sigma;
  Matrix v;  // all right singular vectors, columns sorted by sigma
};

/// Right singular vectors of a (typically tall) matrix, reducing to the
/// triangular QR factor first when rows outnumber columns.
RightSvd right_svd(const Matrix& g) {
  RightSvd out;
  const Index n = g.cols();
  if (n == 0) return out;
  Matrix core;
  if (g.rows() > n) {
    Eigen::HouseholderQR<Matrix> qr(g);
    core = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  } else {
    core = g;
  }
  if (core.rows() == 0) {
    out.sigma = Vector::Zero(0);
    out.v = Matrix::Identity(n, n);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(core, Eigen::ComputeFullV);
  out.sigma = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

Index choose_rank(const RightSvd& svd, Index cols, const H2BuildOptions& options) {
  if (options.fixed_rank > 0) return std::min(options.fixed_rank, cols);
  return truncated_rank(svd.sigma, options.tol, cols);
}

struct BasisBuild {
  ClusterBasis basis;
  std::vector<Matrix> expanded;
};

/// Builds the basis for the columns of `m` (indexed by `tree` positions). Rows
/// of `m` are indexed by positions of `other`; partners[t] lists the nodes of
/// `other` forming far pairs with t.
BasisBuild build_basis(const Matrix& m, const ClusterTree& tree, const ClusterTree& other,
                       const std::vector<std::vector<int>>& partners,
                       const H2BuildOptions& options) {
  const auto count = static_cast<std::size_t>(tree.node_count());
  // Far-field strip rows of every node: its own partners plus its ancestors'.
  std::vector<std::vector<int>> strip(count);
  for (int id = 0; id < tree.node_count(); ++id) {
    const auto slot = static_cast<std::size_t>(id);
    const int parent = tree.node(id).parent;
    if (parent >= 0) strip[slot] = strip[static_cast<std::size_t>(parent)];
    strip[slot].insert(strip[slot].end(), partners[slot].begin(), partners[slot].end());
  }
  auto gather = [&](int id, Index col_begin, Index col_count) {
    Index rows = 0;
    for (int o : strip[static_cast<std::size_t>(id)]) rows += other.node(o).size();
    Matrix g(rows, col_count);
    Index at = 0;
    for (int o : strip[static_cast<std::size_t>(id)]) {
      const ClusterNode& on = other.node(o);
      g.middleRows(at, on.size()) = m.block(on.begin, col_begin, on.size(), col_count);
      at += on.size();
    }
    return g;
  };

  BasisBuild out;
  out.basis.ranks.assign(count, 0);
  out.basis.leaf.assign(count, Matrix());
  out.basis.transfer.assign(count, Matrix());
  out.expanded.assign(count, Matrix());

  for (int id = tree.node_count() - 1; id >= 0; --id) {
    const ClusterNode& node = tree.node(id);
    const auto slot = static_cast<std::size_t>(id);
    if (strip[slot].empty()) {
      out.basis.ranks[slot] = 0;
      if (node.is_leaf()) out.basis.leaf[slot] = Matrix(node.size(), 0);
      out.expanded[slot] = Matrix(node.size(), 0);
      continue;
    }
    if (node.is_leaf()) {
      const RightSvd svd = right_svd(gather(id, node.begin, node.size()));
      const Index k = choose_rank(svd, node.size(), options);
      out.basis.ranks[slot] = k;
      out.basis.leaf[slot] = svd.v.leftCols(k);
      out.expanded[slot] = out.basis.leaf[slot];
      continue;
    }
    // Project the strip onto the sons' bases and compress the coefficients.
    const auto [c0, c1] = node.children;
    const ClusterNode& n0 = tree.node(c0);
    const ClusterNode& n1 = tree.node(c1);
    const Matrix& v0 = out.expanded[static_cast<std::size_t>(c0)];
    const Matrix& v1 = out.expanded[static_cast<std::size_t>(c1)];
    Matrix projected(0, v0.cols() + v1.cols());
    {
      const Matrix g0 = gather(id, n0.begin, n0.size());
      const Matrix g1 = gather(id, n1.begin, n1.size());
      projected.resize(g0.rows(), v0.cols() + v1.cols());
      projected.leftCols(v0.cols()).noalias() = g0 * v0;
      projected.rightCols(v1.cols()).noalias() = g1 * v1;
    }
    const RightSvd svd = right_svd(projected);
    const Index k = choose_rank(svd, projected.cols(), options);
    out.basis.ranks[slot] = k;
    const Matrix w = svd.v.leftCols(k);
    out.basis.transfer[static_cast<std::size_t>(c0)] = w.topRows(v0.cols());
    out.basis.transfer[static_cast<std::size_t>(c1)] = w.bottomRows(v1.cols());
    out.expanded[slot].resize(node.size(), k);
    out.expanded[slot].topRows(n0.size()).noalias() = v0 * w.topRows(v0.cols());
    out.expanded[slot].bottomRows(n1.size()).noalias() = v1 * w.bottomRows(v1.cols());
  }
  // Sons of rank-0 fathers still need correctly shaped transfers.
  for (int id = 1; id < tree.node_count(); ++id) {
    const auto slot = static_cast<std::size_t>(id);
    const Index parent_rank = out.basis.ranks[static_cast<std::size_t>(tree.node(id).parent)];
    if (out.basis.transfer[slot].rows() != out.basis.ranks[slot] ||
        out.basis.transfer[slot].cols() != parent_rank)
      out.basis.transfer[slot] = Matrix::Zero(out.basis.ranks[slot], parent_rank);
  }
  return out;
}

}  // namespace

H2Matrix build_h2_dense(const Matrix& dense, std::shared_ptr<const ClusterTree> row_tree,
                        std::shared_ptr<const ClusterTree> col_tree,
                        const BlockPartition& partition, const H2BuildOptions& options) {
  require(row_tree && col_tree, "h2 build: missing cluster tree");
  require(dense.rows() == row_tree->size() && dense.cols() == col_tree->size(),
          "h2 build: dense matrix does not match the cluster trees");
  require(options.fixed_rank > 0 || (options.tol > 0.0 && options.tol < 1.0),
          "h2 build: tol must lie in (0, 1)");

  const auto rp = row_tree->permutation();
  const auto cp = col_tree->permutation();
  Matrix tree_order(dense.rows(), dense.cols());
  for (Index b = 0; b < dense.cols(); ++b)
    for (Index a = 0; a < dense.rows(); ++a)
      tree_order(a, b) = dense(rp[static_cast<std::size_t>(a)], cp[static_cast<std::size_t>(b)]);

  std::vector<std::vector<int>> row_partners(static_cast<std::size_t>(row_tree->node_count()));
  std::vector<std::vector<int>> col_partners(static_cast<std::size_t>(col_tree->node_count()));
  for (const BlockPair& p : partition.far) {
    row_partners[static_cast<std::size_t>(p.row)].push_back(p.col);
    col_partners[static_cast<std::size_t>(p.col)].push_back(p.row);
  }

  BasisBuild cols = build_basis(tree_order, *col_tree, *row_tree, col_partners, options);
  BasisBuild rows = build_basis(tree_order.transpose(), *row_tree, *col_tree, row_partners, options);

  std::vector<Matrix> coupling;
  coupling.reserve(partition.far.size());
  for (const BlockPair& p : partition.far) {
    const ClusterNode& rn = row_tree->node(p.row);
    const ClusterNode& cn = col_tree->node(p.col);
    coupling.push_back(rows.expanded[static_cast<std::size_t>(p.row)].transpose() *
                       tree_order.block(rn.begin, cn.begin, rn.size(), cn.size()) *
                       cols.expanded[static_cast<std::size_t>(p.col)]);
  }
  std::vector<Matrix> close;
  close.reserve(partition.close.size());
  for (const BlockPair& p : partition.close) {
    const ClusterNode& rn = row_tree->node(p.row);
    const ClusterNode& cn = col_tree->node(p.col);
    close.push_back(tree_order.block(rn.begin, cn.begin, rn.size(), cn.size()));
  }
  return H2Matrix(std::move(row_tree), std::move(col_tree), partition, std::move(rows.basis),
                  std::move(cols.basis), std::move(coupling), std::move(close));
}

namespace {

struct Orthogonalized {
  ClusterBasis basis;
  std::vector<Matrix> weight;  // old basis = new basis * weight
};

/// Thin QR: returns (Q, R) with Q m x q orthonormal, R q x n, q = min(m, n).
std::pair<Matrix, Matrix> thin_qr(const Matrix& z) {
  const Index q = std::min(z.rows(), z.cols());
  if (q == 0) return {Matrix(z.rows(), 0), Matrix(0, z.cols())};
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix qm = qr.householderQ() * Matrix::Identity(z.rows(), q);
  Matrix rm = qr.matrixQR().topRows(q).triangularView<Eigen::Upper>();
  return {std::move(qm), std::move(rm)};
}

Orthogonalized orthogonalize(const ClusterBasis& basis, const ClusterTree& tree) {
  const auto count = static_cast<std::size_t>(tree.node_count());
  Orthogonalized out;
  out.basis.ranks.assign(count, 0);
  out.basis.leaf.assign(count, Matrix());
  out.basis.transfer.assign(count, Matrix());
  out.weight.assign(count, Matrix());
  for (int id = tree.node_count() - 1; id >= 0; --id) {
    const ClusterNode& node = tree.node(id);
    const auto slot = static_cast<std::size_t>(id);
    if (node.is_leaf()) {
      auto [q, r] = thin_qr(basis.leaf[slot]);
      out.basis.ranks[slot] = q.cols();
      out.basis.leaf[slot] = std::move(q);
      out.weight[slot] = std::move(r);
      continue;
    }
    Index stacked = 0;
    for (int c : node.children) stacked += out.basis.ranks[static_cast<std::size_t>(c)];
    Matrix z(stacked, basis.rank(id));
    Index at = 0;
    for (int c : node.children) {
      const auto cs = static_cast<std::size_t>(c);
      z.middleRows(at, out.basis.ranks[cs]).noalias() = out.weight[cs] * basis.transfer[cs];
      at += out.basis.ranks[cs];
    }
    auto [q, r] = thin_qr(z);
    at = 0;
    for (int c : node.children) {
      const auto cs = static_cast<std::size_t>(c);
      out.basis.transfer[cs] = q.middleRows(at, out.basis.ranks[cs]);
      at += out.basis.ranks[cs];
    }
    out.basis.ranks[slot] = q.cols();
    out.weight[slot] = std::move(r);
  }
  return out;
}

/// Per node, an upper-triangular R with ||R V_t^T|| equal to the norm of the
/// whole far-field strip (own blocks plus inherited ancestor blocks) seen
/// through the node's orthonormal basis V_t.
std::vector<Matrix> condense_weights(const ClusterBasis& basis, const ClusterTree& tree,
                                     const std::vector<std::vector<Matrix>>& blocks) {
  const auto count = static_cast<std::size_t>(tree.node_count());
  std::vector<Matrix> out(count);
  for (int id = 0; id < tree.node_count(); ++id) {
    const auto slot = static_cast<std::size_t>(id);
    const Index k = basis.rank(id);
    const int parent = tree.node(id).parent;
    Index rows = 0;
    for (const Matrix& b : blocks[slot]) rows += b.rows();
    const Matrix* inherited = parent >= 0 ? &out[static_cast<std::size_t>(parent)] : nullptr;
    if (inherited) rows += inherited->rows();
    Matrix stack(rows, k);
    Index at = 0;
    for (const Matrix& b : blocks[slot]) {
      stack.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    if (inherited) stack.middleRows(at, inherited->rows()).noalias() = *inherited * basis.transfer[slot].transpose();
    out[slot] = stack.rows() > k ? thin_qr(stack).second : stack;
  }
  return out;
}

struct Truncated {
  ClusterBasis basis;
  std::vector<Matrix> projection;  // new coefficients = projection * old coefficients
};

Truncated truncate_basis(const ClusterBasis& basis, const ClusterTree& tree,
                         const std::vector<Matrix>& weights, double delta) {
  const auto count = static_cast<std::size_t>(tree.node_count());
  Truncated out;
  out.basis.ranks.assign(count, 0);
  out.basis.leaf.assign(count, Matrix());
  out.basis.transfer.assign(count, Matrix());
  out.projection.assign(count, Matrix());
  for (int id = tree.node_count() - 1; id >= 0; --id) {
    const ClusterNode& node = tree.node(id);
    const auto slot = static_cast<std::size_t>(id);
    const Index old_rank = basis.rank(id);
    if (node.is_leaf()) {
      const RightSvd svd = right_svd(weights[slot]);
      const Index k = truncated_rank(svd.sigma, delta, old_rank);
      const Matrix y = svd.v.leftCols(k);
      out.basis.ranks[slot] = k;
      out.basis.leaf[slot] = basis.leaf[slot] * y;
      out.projection[slot] = y.transpose();
      continue;
    }
    Index stacked = 0;
    for (int c : node.children) stacked += out.basis.ranks[static_cast<std::size_t>(c)];
    Matrix e_hat(stacked, old_rank);
    Index at = 0;
    for (int c : node.children) {
      const auto cs = static_cast<std::size_t>(c);
      e_hat.middleRows(at, out.basis.ranks[cs]).noalias() = out.projection[cs] * basis.transfer[cs];
      at += out.basis.ranks[cs];
    }
    const RightSvd svd = right_svd(weights[slot] * e_hat.transpose());
    const Index k = truncated_rank(svd.sigma, delta, std::min(old_rank, stacked));
    const Matrix z = stacked > 0 ? Matrix(svd.v.leftCols(k)) : Matrix(0, 0);
    at = 0;
    for (int c : node.children) {
      const auto cs = static_cast<std::size_t>(c);
      out.basis.transfer[cs] = z.middleRows(at, out.basis.ranks[cs]);
      at += out.basis.ranks[cs];
    }
    out.basis.ranks[slot] = k;
    out.projection[slot] = z.transpose() * e_hat;
  }
  return out;
}

}  // namespace

H2Matrix recompress(const H2Matrix& a, double delta_svd) {
  require(delta_svd > 0.0 && delta_svd < 1.0, "recompress: delta_svd must lie in (0, 1)");
  const ClusterTree& rt = a.row_tree();
  const ClusterTree& ct = a.col_tree();
  const BlockPartition& part = a.partition();

  const Orthogonalized row_orth = orthogonalize(a.row_basis(), rt);
  const Orthogonalized col_orth = orthogonalize(a.col_basis(), ct);
  std::vector<Matrix> coupling(part.far.size());
  for (std::size_t p = 0; p < part.far.size(); ++p) {
    const auto [r, c] = part.far[p];
    coupling[p] = row_orth.weight[static_cast<std::size_t>(r)] * a.coupling(p) *
                  col_orth.weight[static_cast<std::size_t>(c)].transpose();
  }

  std::vector<std::vector<Matrix>> row_blocks(static_cast<std::size_t>(rt.node_count()));
  std::vector<std::vector<Matrix>> col_blocks(static_cast<std::size_t>(ct.node_count()));
  for (std::size_t p = 0; p < part.far.size(); ++p) {
    const auto [r, c] = part.far[p];
    row_blocks[static_cast<std::size_t>(r)].push_back(coupling[p].transpose());
    col_blocks[static_cast<std::size_t>(c)].push_back(coupling[p]);
  }
  const Truncated rows = truncate_basis(row_orth.basis, rt, condense_weights(row_orth.basis, rt, row_blocks), delta_svd);
  const Truncated cols = truncate_basis(col_orth.basis, ct, condense_weights(col_orth.basis, ct, col_blocks), delta_svd);

  for (std::size_t p = 0; p < part.far.size(); ++p) {
    const auto [r, c] = part.far[p];
    coupling[p] = rows.projection[static_cast<std::size_t>(r)] * coupling[p] *
                  cols.projection[static_cast<std::size_t>(c)].transpose();
  }
  std::vector<Matrix> close;
  close.reserve(part.close.size());
  for (std::size_t p = 0; p < part.close.size(); ++p) close.push_back(a.close_block(p));
  return H2Matrix(a.row_tree_ptr(), a.col_tree_ptr(), part, rows.basis, cols.basis,
                  std::move(coupling), std::move(close));
}

}  // namespace h2se
