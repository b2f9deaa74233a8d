#include "support.hpp"

#include "h2se/ilut.hpp"
#include "h2se/krylov.hpp"
#include "h2se/sparse.hpp"

#include <doctest.h>

#include <sstream>

using namespace testing;

namespace {

SparseMatrix laplacian_1d(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return SparseMatrix::from_triplets(n, n, t);
}

// Random sparse matrix with a dominant but permuted diagonal.
SparseMatrix random_sparse(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, (i * 7 + 3) % n, 4.0 + rng.uniform()});
    for (int k = 0; k < 4; ++k) t.push_back({i, static_cast<Index>(rng.next() % static_cast<std::uint64_t>(n)), rng.symmetric()});
  }
  return SparseMatrix::from_triplets(n, n, t);
}

Matrix permuted_product(const IlutFactors& f, Index n) {
  Matrix l = f.lower().to_dense() + Matrix::Identity(n, n);
  return l * f.upper().to_dense();
}

// P M Q with P from the row order and Q from the column permutation.
Matrix permuted_matrix(const IlutFactors& f, const Matrix& m) {
  const Index n = m.rows();
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = m(f.row_order()[i], f.column_permutation()[j]);
  return out;
}

IlutOptions complete() { return {0.0, -1, 0.1}; }

}  // namespace

TEST_CASE("compressed rows keep their invariants") {
  const SparseMatrix m = SparseMatrix::from_triplets(3, 4, {{0, 3, 1.0}, {0, 1, 2.0}, {2, 0, 3.0}, {0, 1, 0.5}, {1, 2, 1.0}, {1, 2, -1.0}});
  CHECK(m.nnz() == 4);
  CHECK(m.coeff(0, 1) == 2.5);
  CHECK(m.coeff(1, 2) == 0.0);
  CHECK(m.row_indices(1).size() == 1);
  for (Index r = 0; r < m.rows(); ++r) {
    const auto idx = m.row_indices(r);
    for (std::size_t k = 1; k < idx.size(); ++k) CHECK(idx[k - 1] < idx[k]);
  }
  CHECK(m.offsets().back() - m.offsets().front() == m.nnz());
  CHECK(m.transpose().to_dense() == m.to_dense().transpose());
  CHECK(m.block(0, 1, 2, 3).to_dense() == m.to_dense().block(0, 1, 2, 3));
  const Vector x = Vector::LinSpaced(4, 1.0, 4.0);
  CHECK(m * x == m.to_dense() * x);
  CHECK((m + m).to_dense() == 2.0 * m.to_dense());
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 2, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{2, 0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(m * Vector::Zero(2), std::invalid_argument);
}

TEST_CASE("diagonal matrices factor exactly") {
  const Index n = 6;
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) t.push_back({i, i, static_cast<double>(i + 1)});
  const SparseMatrix d = SparseMatrix::from_triplets(n, n, t);
  const IlutFactors f = IlutFactors::factorize(d, {});
  CHECK(f.lower().nnz() == 0);
  const Vector x = f.solve(Vector::Ones(n));
  for (Index i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(1.0 / static_cast<double>(i + 1)).epsilon(1e-15));
}

TEST_CASE("tridiagonal Laplacian reproduces the exact LU recurrence") {
  const Index n = 100;
  const SparseMatrix m = laplacian_1d(n);
  const IlutFactors f = IlutFactors::factorize(m, {0.0, 20, 0.0});
  const Matrix l = f.lower().to_dense(), u = f.upper().to_dense();
  // d_0 = 2, l_i = -1 / d_{i-1}, d_i = 2 - 1 / d_{i-1}.
  double d = 2.0;
  CHECK(u(0, 0) == doctest::Approx(d));
  for (Index i = 1; i < n; ++i) {
    CHECK(l(i, i - 1) == doctest::Approx(-1.0 / d));
    d = 2.0 - 1.0 / d;
    CHECK(u(i, i) == doctest::Approx(d));
    CHECK(u(i - 1, i) == -1.0);
  }
  CHECK((permuted_product(f, n) - m.to_dense()).norm() <= 1e-12);
  CHECK(f.zero_pivots() == 0);
}

TEST_CASE("complete factorization limit gives one GMRES step") {
  SUBCASE("extended form at N = 256") {
    PointSet p = random_points(256, 31, true);
    for (double& w : p.weights) w = 1.0 / 256;
    const auto a = h2_from(assemble_dense(p, Kernel{}), p, 16, 1.0, {});
    const SEForm se = assemble_se(*a);
    const IlutFactors f = IlutFactors::factorize(se.matrix(), complete(), se.diagonal_row_order());
    const LinearOperator prec = f.as_operator();
    const GmresResult g = gmres(se.as_operator(), se.extend_rhs(SplitMix64(3).symmetric_vector(256)), {}, &prec);
    CHECK(g.converged);
    CHECK(g.iterations == 1);
  }
  SUBCASE("random sparse matrices") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const SparseMatrix m = random_sparse(150, seed);
      for (double pivot : {0.1, 1.0}) {
        const IlutFactors f = IlutFactors::factorize(m, {0.0, -1, pivot});
        CHECK(rel_err(permuted_product(f, m.rows()), permuted_matrix(f, m.to_dense())) < 1e-12);
        const LinearOperator prec = f.as_operator();
        const GmresResult g = gmres(m.as_operator(), SplitMix64(seed).symmetric_vector(150), {}, &prec);
        CHECK(g.converged);
        CHECK(g.iterations == 1);
      }
    }
  }
}

TEST_CASE("static row order is honoured") {
  const SparseMatrix m = random_sparse(40, 9);
  std::vector<Index> order(40);
  for (Index i = 0; i < 40; ++i) order[static_cast<std::size_t>(i)] = (i * 7 + 3) % 40;
  const IlutFactors f = IlutFactors::factorize(m, complete(), order);
  CHECK(std::vector<Index>(f.row_order().begin(), f.row_order().end()) == order);
  CHECK(rel_err(permuted_product(f, 40), permuted_matrix(f, m.to_dense())) < 1e-12);
  const Vector b = SplitMix64(1).symmetric_vector(40);
  CHECK(rel_err(Vector(m * f.solve(b)), b) < 1e-12);
  std::vector<Index> bad(order);
  bad[0] = bad[1];
  CHECK_THROWS_AS(IlutFactors::factorize(m, {}, bad), std::invalid_argument);
}

TEST_CASE("zero pivots are perturbed and counted") {
  // [[0, 1], [1, 0]] has a structurally zero first pivot without pivoting.
  const SparseMatrix m = SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  const IlutFactors f = IlutFactors::factorize(m, {0.25, 5, 0.0});
  CHECK(f.zero_pivots() >= 1);
  const Vector x = f.solve(Vector::Ones(2));
  CHECK(x.allFinite());
  const IlutFactors pivoted = IlutFactors::factorize(m, {0.25, 5, 0.5});
  CHECK(pivoted.zero_pivots() == 0);
  CHECK(pivoted.column_swaps() >= 1);
  CHECK(rel_err(pivoted.solve(Vector::Ones(2)), Vector(Vector::Ones(2))) < 1e-15);
}

TEST_CASE("dropping bounds the fill") {
  PointSet p = random_points(300, 2, true);
  for (double& w : p.weights) w = 1.0 / 300;
  const auto a = h2_from(assemble_dense(p, Kernel{}), p, 16, 1.0, {});
  const SEForm se = assemble_se(*a);
  const IlutFactors loose = IlutFactors::factorize(se.matrix(), {1e-1, 5, 0.1}, se.diagonal_row_order());
  const IlutFactors tight = IlutFactors::factorize(se.matrix(), {1e-4, 40, 0.1}, se.diagonal_row_order());
  const IlutFactors full = IlutFactors::factorize(se.matrix(), complete(), se.diagonal_row_order());
  CHECK(loose.nnz() < tight.nnz());
  CHECK(tight.nnz() <= full.nnz());
  // Per row, each factor holds at most its original count plus fill_max.
  const SparseMatrix l = loose.lower(), u = loose.upper();
  for (Index i = 0; i < se.size(); ++i)
    CHECK(l.row_indices(i).size() + u.row_indices(i).size() <= se.matrix().row_indices(loose.row_order()[i]).size() + 10 + 1);
}

TEST_CASE("factor application is linear") {
  const SparseMatrix m = random_sparse(80, 4);
  const IlutFactors f = IlutFactors::factorize(m, {});
  SplitMix64 rng(4);
  const Vector a = rng.symmetric_vector(80), b = rng.symmetric_vector(80);
  CHECK(rel_err(f.solve(Vector(3.0 * a - 0.5 * b)), Vector(3.0 * f.solve(a) - 0.5 * f.solve(b))) < 1e-13);
}

TEST_CASE("Matrix Market writer uses one-based coordinates") {
  const SparseMatrix m = SparseMatrix::from_triplets(2, 3, {{0, 2, 1.5}, {1, 0, -2.0}});
  std::ostringstream out;
  m.write_matrix_market(out);
  CHECK(out.str().find("2 3 2\n") != std::string::npos);
  CHECK(out.str().find("1 3 1.5") != std::string::npos);
  CHECK(out.str().find("2 1 -2") != std::string::npos);
}
