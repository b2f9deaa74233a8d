#include "h2se/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace h2se {

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> offsets,
                           std::vector<Index> indices, std::vector<double> values)
    : rows_(rows), cols_(cols), offsets_(std::move(offsets)), indices_(std::move(indices)), values_(std::move(values)) {
  require(rows_ >= 0 && cols_ >= 0, "sparse: negative shape");
  require(offsets_.size() == static_cast<std::size_t>(rows_) + 1, "sparse: offsets need rows + 1 entries");
  require(offsets_.front() == 0 && offsets_.back() == static_cast<Index>(indices_.size()) &&
              indices_.size() == values_.size(),
          "sparse: offsets disagree with the stored entries");
  for (Index r = 0; r < rows_; ++r) {
    require(offsets_[static_cast<std::size_t>(r)] <= offsets_[static_cast<std::size_t>(r) + 1],
            "sparse: offsets must be non-decreasing");
    for (Index k = offsets_[static_cast<std::size_t>(r)]; k < offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
      const Index c = indices_[static_cast<std::size_t>(k)];
      require(c >= 0 && c < cols_, "sparse: column index out of range");
      require(k == offsets_[static_cast<std::size_t>(r)] || indices_[static_cast<std::size_t>(k) - 1] < c,
              "sparse: column indices must increase strictly within a row");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets)
    require(t.row >= 0 && t.row < rows && t.col >= 0 && t.col < cols, "sparse: triplet out of range");
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row < b.row || (a.row == b.row && a.col < b.col);
  });
  std::vector<Index> offsets(static_cast<std::size_t>(rows) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  indices.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (!indices.empty() && k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col) {
      values.back() += t.value;
      continue;
    }
    indices.push_back(t.col);
    values.push_back(t.value);
    ++offsets[static_cast<std::size_t>(t.row) + 1];
  }
  for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) offsets[r + 1] += offsets[r];
  return SparseMatrix(rows, cols, std::move(offsets), std::move(indices), std::move(values));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

std::size_t SparseMatrix::bytes() const {
  return offsets_.size() * sizeof(Index) + indices_.size() * sizeof(Index) + values_.size() * sizeof(double);
}

std::span<const Index> SparseMatrix::row_indices(Index r) const {
  const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r)]);
  const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r) + 1]);
  return std::span<const Index>(indices_).subspan(b, e - b);
}

std::span<const double> SparseMatrix::row_values(Index r) const {
  const auto b = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r)]);
  const auto e = static_cast<std::size_t>(offsets_[static_cast<std::size_t>(r) + 1]);
  return std::span<const double>(values_).subspan(b, e - b);
}

double SparseMatrix::coeff(Index r, Index c) const {
  const auto idx = row_indices(r);
  auto it = std::lower_bound(idx.begin(), idx.end(), c);
  if (it == idx.end() || *it != c) return 0.0;
  return row_values(r)[static_cast<std::size_t>(it - idx.begin())];
}

void SparseMatrix::multiply(const Vector& x, Vector& y) const {
  require(x.size() == cols_, "sparse multiply: length mismatch");
  y.resize(rows_);
  for (Index r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (Index k = offsets_[static_cast<std::size_t>(r)]; k < offsets_[static_cast<std::size_t>(r) + 1]; ++k)
      sum += values_[static_cast<std::size_t>(k)] * x[indices_[static_cast<std::size_t>(k)]];
    y[r] = sum;
  }
}

Vector SparseMatrix::operator*(const Vector& x) const {
  Vector y;
  multiply(x, y);
  return y;
}

LinearOperator SparseMatrix::as_operator() const {
  require(rows_ == cols_, "sparse: operator view needs a square matrix");
  return {rows_, [this](const Vector& in, Vector& out) { multiply(in, out); }};
}

SparseMatrix SparseMatrix::block(Index r0, Index c0, Index nr, Index nc) const {
  require(r0 >= 0 && c0 >= 0 && nr >= 0 && nc >= 0 && r0 + nr <= rows_ && c0 + nc <= cols_,
          "sparse block: range out of bounds");
  std::vector<Index> offsets(static_cast<std::size_t>(nr) + 1, 0);
  std::vector<Index> indices;
  std::vector<double> values;
  for (Index r = 0; r < nr; ++r) {
    const auto idx = row_indices(r0 + r);
    const auto val = row_values(r0 + r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < c0 || idx[k] >= c0 + nc) continue;
      indices.push_back(idx[k] - c0);
      values.push_back(val[k]);
    }
    offsets[static_cast<std::size_t>(r) + 1] = static_cast<Index>(indices.size());
  }
  return SparseMatrix(nr, nc, std::move(offsets), std::move(indices), std::move(values));
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) t.push_back({idx[k], r, val[k]});
  }
  return from_triplets(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::operator+(const SparseMatrix& other) const {
  require(rows_ == other.rows_ && cols_ == other.cols_, "sparse add: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(values_.size() + other.values_.size());
  for (const SparseMatrix* m : {this, &other})
    for (Index r = 0; r < rows_; ++r) {
      const auto idx = m->row_indices(r);
      const auto val = m->row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) t.push_back({r, idx[k], val[k]});
    }
  return from_triplets(rows_, cols_, std::move(t));
}

Matrix SparseMatrix::to_dense() const {
  Matrix d = Matrix::Zero(rows_, cols_);
  for (Index r = 0; r < rows_; ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) d(r, idx[k]) += val[k];
  }
  return d;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) t.emplace_back(r, idx[k], val[k]);
  }
  Eigen::SparseMatrix<double> m(rows_, cols_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

void SparseMatrix::write_matrix_market(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << rows_ << ' ' << cols_ << ' ' << nnz() << '\n';
  char buf[64];
  for (Index r = 0; r < rows_; ++r) {
    const auto idx = row_indices(r);
    const auto val = row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", val[k]);
      out << r + 1 << ' ' << idx[k] + 1 << ' ' << buf << '\n';
    }
  }
}

}  // namespace h2se
