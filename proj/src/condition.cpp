#include "h2se/condition.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace h2se {

double condition_exact(const Matrix& m) {
  require(m.rows() == m.cols() && m.rows() > 0, "condition: matrix must be square and non-empty");
  const Vector s = Eigen::BDCSVD<Matrix>(m).singularValues();
  const double smax = s[0], smin = s[s.size() - 1];
  if (!(smin > 0.0) || !std::isfinite(smax / smin)) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

double estimate_condition(const LinearOperator& op, Index dense_cap) {
  if (op.size > dense_cap)
    throw InfeasibleError("condition: operator of size " + std::to_string(op.size) + " exceeds the dense cap");
  Matrix dense(op.size, op.size);
  Vector e = Vector::Zero(op.size), col(op.size);
  for (Index j = 0; j < op.size; ++j) {
    e[j] = 1.0;
    op.apply(e, col);
    dense.col(j) = col;
    e[j] = 0.0;
  }
  return condition_exact(dense);
}

double estimate_condition(const SparseMatrix& m, Index dense_cap, int iterations) {
  require(m.rows() == m.cols() && m.rows() > 0, "condition: matrix must be square and non-empty");
  if (m.rows() <= dense_cap) return condition_exact(m.to_dense());

  const Index n = m.rows();
  const SparseMatrix mt = m.transpose();
  Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double smax = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = mt * (m * v);
    const double norm = w.norm();
    if (norm == 0.0) return std::numeric_limits<double>::infinity();
    smax = std::sqrt(norm);
    v = w / norm;
  }

  using Lu = Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>>;
  Eigen::SparseMatrix<double> a = m.to_eigen(), at = mt.to_eigen();
  a.makeCompressed();
  at.makeCompressed();
  Lu lu, lut;
  lu.compute(a);
  lut.compute(at);
  if (lu.info() != Eigen::Success || lut.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
  double inv = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector u = lut.solve(v);
    Vector w = lu.solve(u);
    const double norm = w.norm();
    if (!std::isfinite(norm)) return std::numeric_limits<double>::infinity();
    inv = std::sqrt(norm);
    v = w / norm;
  }
  return smax * inv;
}

}  // namespace h2se
