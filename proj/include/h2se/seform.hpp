#pragma once

#include "h2se/common.hpp"
#include "h2se/h2matrix.hpp"
#include "h2se/sparse.hpp"

#include <iosfwd>
#include <vector>

namespace h2se {

struct BlockSpan {
  Index begin = 0;
  Index size = 0;
  Index end() const { return begin + size; }
};

/// Index layout of the extended unknown z = (x | xhat | yhat).
///
/// x is in the original ordering. xhat lists column-tree leaves by node id,
/// then inner column nodes level by level from the deepest level up to the
/// root. yhat lists inner row nodes level by level from the root down, then
/// row-tree leaves by node id. Nodes of rank zero are squeezed out.
///
/// Equation rows come in the order (y | yhat | xhat) and each of the two
/// extended row groups uses the same node order as the matching unknowns, so
/// the shift blocks are plain identities.
struct SELayout {
  Index n = 0;
  BlockSpan x;
  BlockSpan xhat;
  BlockSpan yhat;
  BlockSpan xhat_leaves;
  BlockSpan xhat_inner;
  BlockSpan yhat_inner;
  BlockSpan yhat_leaves;
  std::vector<int> xhat_nodes;      // column nodes in layout order
  std::vector<int> yhat_nodes;      // row nodes in layout order
  std::vector<Index> xhat_offset;   // per column node; -1 when squeezed
  std::vector<Index> yhat_offset;   // per row node; -1 when squeezed

  Index size() const { return x.size + xhat.size + yhat.size; }
  BlockSpan y_rows() const { return {0, n}; }
  BlockSpan yhat_rows() const { return {n, yhat.size}; }
  BlockSpan xhat_rows() const { return {n + yhat.size, xhat.size}; }
  /// Equation row of the first coefficient of a row node's yhat equation.
  Index yhat_row(int row_node) const;
  Index xhat_row(int col_node) const;
};

/// Sparse extended form H of an H2 matrix: H z = (y, 0, 0) holds exactly when
/// the x block of z solves A x = y.
class SEForm {
 public:
  SEForm(SparseMatrix h, SELayout layout, int row_depth, int col_depth);

  const SparseMatrix& matrix() const { return h_; }
  const SELayout& layout() const { return layout_; }
  /// The unshifted matrix (H with the two identity blocks added back).
  SparseMatrix h0() const;

  Index n() const { return layout_.n; }
  Index size() const { return layout_.size(); }
  int row_depth() const { return row_depth_; }
  int col_depth() const { return col_depth_; }
  int depth() const { return std::max(row_depth_, col_depth_); }
  /// N_H < (2k + 1) N.
  bool satisfies_size_bound() const;

  /// Principal block of H holding the coupling matrix S: rows start at the
  /// yhat equations, columns at xhat, sized to the larger of the two.
  BlockSpan coupling_square() const;

  /// Equation rows in the order (y | xhat | yhat). Row i of this order pairs
  /// with unknown i: C, the R - I block and the L - I block land on the
  /// diagonal, which is what an incomplete factorization wants to pivot on.
  std::vector<Index> diagonal_row_order() const;

  Vector extend_rhs(const Vector& y) const;
  Vector extract_solution(const Vector& z) const;
  Vector matvec(const Vector& v) const;
  LinearOperator as_operator() const { return h_.as_operator(); }

  /// Places x and the traced coefficients of a matvec into the unknown layout.
  Vector pack(const Vector& x, const MatvecTrace& trace) const;
  /// Right-hand side layout of H0: (y | yhat | xhat) in equation-row order.
  Vector pack_equations(const MatvecTrace& trace) const;

  void write_manifest(std::ostream& out) const;

 private:
  SparseMatrix h_;
  SELayout layout_;
  int row_depth_ = 0;
  int col_depth_ = 0;
};

SEForm assemble_se(const H2Matrix& a);

}  // namespace h2se
