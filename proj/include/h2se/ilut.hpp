#pragma once

#include "h2se/common.hpp"
#include "h2se/sparse.hpp"

#include <span>
#include <vector>

namespace h2se {

struct IlutOptions {
  /// Entries below drop_tol * ||row||_2 are discarded.
  double drop_tol = 1e-2;
  /// New (non-original) entries kept per row in each of L and U; negative
  /// means unbounded.
  Index fill_max = 20;
  /// Columns are swapped when |diag| < pivot_tol * max |U row|. Zero disables.
  double pivot_tol = 0.1;
};

/// Row-wise dual-threshold incomplete LU with threshold column pivoting:
/// P M Q ~ L U, L unit lower triangular, P a static row order chosen by the
/// caller, Q the column permutation built by pivoting.
class IlutFactors {
 public:
  /// row_order[i] is the row of `m` factored i-th; empty means natural order.
  static IlutFactors factorize(const SparseMatrix& m, const IlutOptions& options,
                               std::span<const Index> row_order = {});

  Index size() const { return n_; }
  /// out = Q (L U)^{-1} P rhs, an approximation of M^{-1} rhs.
  void solve(const Vector& rhs, Vector& out) const;
  Vector solve(const Vector& rhs) const;
  LinearOperator as_operator() const;

  /// Strict lower part of L and all of U in (row, position) coordinates.
  SparseMatrix lower() const;
  SparseMatrix upper() const;
  /// column_permutation()[pos] is the original column placed at `pos`.
  std::span<const Index> column_permutation() const { return perm_; }
  std::span<const Index> row_order() const { return rows_; }

  Index zero_pivots() const { return zero_pivots_; }
  Index column_swaps() const { return swaps_; }
  Index nnz() const { return static_cast<Index>(l_val_.size() + u_val_.size()); }
  std::size_t bytes() const;

 private:
  Index n_ = 0;
  std::vector<Index> l_ptr_{0}, l_idx_;
  std::vector<double> l_val_;
  std::vector<Index> u_ptr_{0}, u_idx_;  // diagonal stored first in every U row
  std::vector<double> u_val_;
  std::vector<Index> perm_;
  std::vector<Index> rows_;
  Index zero_pivots_ = 0;
  Index swaps_ = 0;
};

}  // namespace h2se
