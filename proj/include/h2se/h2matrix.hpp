#pragma once

#include "h2se/common.hpp"
#include "h2se/geometry.hpp"

#include <iosfwd>
#include <memory>
#include <vector>

namespace h2se {

/// Nested cluster basis in expansion form.
///
/// For a leaf t the basis is `leaf[t]` (size(t) x rank(t)). For an inner node
/// t with sons s the basis is the vertical stack of basis(s) * transfer[s],
/// where transfer[s] is rank(s) x rank(t). Only leaves carry `leaf` blocks and
/// only non-root nodes carry `transfer` blocks; other slots stay empty.
struct ClusterBasis {
  std::vector<Index> ranks;
  std::vector<Matrix> leaf;
  std::vector<Matrix> transfer;

  Index rank(int node) const { return ranks[static_cast<std::size_t>(node)]; }
  /// Explicit basis of every node, size(t) x rank(t). Test and diagnostics use.
  std::vector<Matrix> expand(const ClusterTree& tree) const;
  std::size_t stored_doubles() const;
};

/// Intermediate vectors of one matvec: per column node the forward-transformed
/// coefficients, per row node the coefficients after the backward transform.
struct MatvecTrace {
  Vector y;
  std::vector<Vector> xhat;
  std::vector<Vector> yhat;
};

struct H2Storage {
  std::size_t basis_doubles = 0;
  std::size_t coupling_doubles = 0;
  std::size_t close_doubles = 0;
  std::size_t bytes() const { return 8 * (basis_doubles + coupling_doubles + close_doubles); }
};

/// H2 representation
///
///   A = sum_{(i,j) far} U_i S_ij V_j^T + sum_{(i,j) close} C_ij
///
/// with a nested row basis U and a nested column basis V. In matvec terms the
/// column side supplies D (leaf projections V_j^T) and R (transposed column
/// transfers), the row side supplies L (row transfers) and E (leaf expansions
/// U_i). Vectors passed to the public operations use the original ordering.
class H2Matrix {
 public:
  H2Matrix(std::shared_ptr<const ClusterTree> row_tree,
           std::shared_ptr<const ClusterTree> col_tree, BlockPartition partition,
           ClusterBasis row_basis, ClusterBasis col_basis, std::vector<Matrix> coupling,
           std::vector<Matrix> close);

  Index rows() const { return row_tree_->size(); }
  Index cols() const { return col_tree_->size(); }

  const ClusterTree& row_tree() const { return *row_tree_; }
  const ClusterTree& col_tree() const { return *col_tree_; }
  const std::shared_ptr<const ClusterTree>& row_tree_ptr() const { return row_tree_; }
  const std::shared_ptr<const ClusterTree>& col_tree_ptr() const { return col_tree_; }
  bool shares_tree() const { return row_tree_ == col_tree_; }
  const BlockPartition& partition() const { return partition_; }
  const ClusterBasis& row_basis() const { return row_basis_; }
  const ClusterBasis& col_basis() const { return col_basis_; }
  /// Coupling block of far pair p (row rank x col rank).
  const Matrix& coupling(std::size_t p) const { return coupling_[p]; }
  /// Dense block of close pair p in tree ordering.
  const Matrix& close_block(std::size_t p) const { return close_[p]; }

  // Matvec-convention views.
  Matrix D(int col_leaf) const { return col_basis_.leaf[static_cast<std::size_t>(col_leaf)].transpose(); }
  Matrix R(int col_node) const { return col_basis_.transfer[static_cast<std::size_t>(col_node)].transpose(); }
  const Matrix& L(int row_node) const { return row_basis_.transfer[static_cast<std::size_t>(row_node)]; }
  const Matrix& E(int row_leaf) const { return row_basis_.leaf[static_cast<std::size_t>(row_leaf)]; }

  Vector matvec(const Vector& x) const;
  MatvecTrace matvec_traced(const Vector& x) const;
  Vector matvec_transpose(const Vector& y) const;
  LinearOperator as_operator() const;

  /// Dense matrix in original ordering.
  Matrix reconstruct() const;
  H2Storage storage() const;

 private:
  void validate() const;

  std::shared_ptr<const ClusterTree> row_tree_;
  std::shared_ptr<const ClusterTree> col_tree_;
  BlockPartition partition_;
  ClusterBasis row_basis_;
  ClusterBasis col_basis_;
  std::vector<Matrix> coupling_;
  std::vector<Matrix> close_;
};

struct H2BuildOptions {
  /// Relative singular value cutoff per node.
  double tol = 1e-6;
  /// When positive, keep exactly this many singular vectors per node (clamped
  /// to what the node can hold) instead of truncating at `tol`.
  Index fixed_rank = 0;
};

/// Bottom-up SVD construction from a dense matrix given in original ordering.
/// Each node's basis spans the far-field strip of the node and its ancestors;
/// parents are built from their sons' projected strips, which makes the bases
/// nested and orthonormal.
H2Matrix build_h2_dense(const Matrix& dense, std::shared_ptr<const ClusterTree> row_tree,
                        std::shared_ptr<const ClusterTree> col_tree,
                        const BlockPartition& partition, const H2BuildOptions& options);

/// SVD recompression: orthogonalize both bases, condense the coupling weights
/// top down, then truncate every node at delta_svd relative to its largest
/// weighted singular value. Ranks never grow.
H2Matrix recompress(const H2Matrix& a, double delta_svd);

/// Versioned binary container, layout in docs/h2-format.md.
void save_h2(const H2Matrix& a, std::ostream& out);
H2Matrix load_h2(std::istream& in);

}  // namespace h2se
