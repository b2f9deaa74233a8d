#pragma once

#include "h2se/common.hpp"

#include <Eigen/SparseCore>

#include <iosfwd>
#include <span>
#include <vector>

namespace h2se {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed row storage with strictly increasing column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Index> offsets, std::vector<Index> indices,
               std::vector<double> values);

  /// Duplicates are summed. Entries that sum to exactly zero are kept, so the
  /// pattern reflects structure rather than values.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(Index n);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  std::size_t bytes() const;

  std::span<const Index> offsets() const { return offsets_; }
  std::span<const Index> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }
  std::span<const Index> row_indices(Index r) const;
  std::span<const double> row_values(Index r) const;

  /// Stored value at (r, c), zero when absent.
  double coeff(Index r, Index c) const;

  void multiply(const Vector& x, Vector& y) const;
  Vector operator*(const Vector& x) const;
  LinearOperator as_operator() const;

  /// Rows [r0, r0+nr) x cols [c0, c0+nc), reindexed from zero.
  SparseMatrix block(Index r0, Index c0, Index nr, Index nc) const;
  SparseMatrix transpose() const;
  SparseMatrix operator+(const SparseMatrix& other) const;
  Matrix to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;

  /// Matrix Market coordinate real general, 1-based indices.
  void write_matrix_market(std::ostream& out) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> offsets_{0};
  std::vector<Index> indices_;
  std::vector<double> values_;
};

}  // namespace h2se
