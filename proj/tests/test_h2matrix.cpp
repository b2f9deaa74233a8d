#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace testing;

namespace {

Matrix rank_one_plus_diagonal(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  const Vector u = rng.symmetric_vector(n), v = rng.symmetric_vector(n);
  Matrix a = u * v.transpose();
  a.diagonal().array() += 5.0;
  return a;
}

double sampled_operator_error(const H2Matrix& a, const H2Matrix& b, int samples, std::uint64_t seed) {
  SplitMix64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector x = rng.symmetric_vector(a.cols());
    worst = std::max(worst, rel_err(b.matvec(x), a.matvec(x)));
  }
  return worst;
}

}  // namespace

TEST_CASE("pure close representation reproduces the dense product") {
  const PointSet p = random_points(128, 5);
  const Matrix dense = Matrix::Random(128, 128);
  const auto a = h2_from(dense, p, 8, 1e-12, {});
  CHECK(a->partition().far.empty());
  for (Index r : a->row_basis().ranks) CHECK(r == 0);
  const Vector x = SplitMix64(1).symmetric_vector(128);
  CHECK(rel_err(a->matvec(x), Vector(dense * x)) < 1e-14);
  CHECK(rel_err(a->reconstruct(), dense) == 0.0);
}

TEST_CASE("rank-one far field gives rank one everywhere") {
  const PointSet p = random_points(64, 11, true);
  H2BuildOptions options;
  options.tol = 1e-8;
  const auto a = h2_from(rank_one_plus_diagonal(64, 3), p, 4, 1.0, options);
  REQUIRE_FALSE(a->partition().far.empty());
  for (const BlockPair& b : a->partition().far) {
    CHECK(a->row_basis().rank(b.row) == 1);
    CHECK(a->col_basis().rank(b.col) == 1);
  }
  for (Index r : a->col_basis().ranks) CHECK(r <= 1);
}

TEST_CASE("reconstruction and matvec accuracy at N = 512") {
  const Fixture f = make_fixture(KernelKind::single_layer, 16, 1e-6);
  CHECK(f.h2->rows() == 512);
  CHECK(rel_err(f.h2->reconstruct(), f.dense) <= 1e-5);
  const Vector x = SplitMix64(4).symmetric_vector(512);
  CHECK(rel_err(f.h2->matvec(x), Vector(f.dense * x)) <= 1e-5);
  CHECK(f.h2->matvec(Vector::Zero(512)).isZero(0.0));
  CHECK(f.h2->matvec_transpose(Vector::Zero(512)).isZero(0.0));
}

TEST_CASE("matvec error stays within ten times the tolerance") {
  for (KernelKind kind : {KernelKind::single_layer, KernelKind::hypersingular}) {
    for (double tol : {1e-4, 1e-6}) {
      for (int n : {8, 12}) {
        const Fixture f = make_fixture(kind, n, tol, 16);
        const Vector x = SplitMix64(static_cast<std::uint64_t>(n)).symmetric_vector(f.h2->cols());
        CHECK(rel_err(f.h2->matvec(x), Vector(f.dense * x)) <= 10 * tol);
      }
    }
  }
}

TEST_CASE("transpose and adjoint identity") {
  const Fixture f = make_fixture(KernelKind::single_layer, 12, 1e-6);
  const Vector x = SplitMix64(6).symmetric_vector(f.h2->cols());
  CHECK(rel_err(f.h2->matvec_transpose(x), f.h2->matvec(x)) <= 1e-5);
  CHECK(rel_err(f.h2->matvec_transpose(x), Vector(f.dense.transpose() * x)) <= 1e-5);

  const Fixture g = make_fixture(KernelKind::hypersingular, 11, 1e-4);
  SplitMix64 rng(8);
  const Vector u = rng.symmetric_vector(g.h2->cols()), v = rng.symmetric_vector(g.h2->rows());
  const double lhs = v.dot(g.h2->matvec(u)), rhs = g.h2->matvec_transpose(v).dot(u);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  CHECK_THROWS_AS(g.h2->matvec(Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(g.h2->matvec_transpose(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("matvec is linear") {
  const Fixture f = make_fixture(KernelKind::hypersingular, 12, 1e-6);
  SplitMix64 rng(12);
  const Vector x = rng.symmetric_vector(f.h2->cols()), z = rng.symmetric_vector(f.h2->cols());
  const double alpha = 0.75, beta = -2.5;
  const Vector lhs = f.h2->matvec(alpha * x + beta * z);
  CHECK(rel_err(lhs, Vector(alpha * f.h2->matvec(x) + beta * f.h2->matvec(z))) < 1e-13);
}

TEST_CASE("nested bases on exactly low-rank input") {
  const PointSet p = random_points(400, 21);
  const Matrix dense = polynomial_kernel(p);
  H2BuildOptions options;
  options.tol = 1e-12;
  const auto a = h2_from(dense, p, 12, 1.0, options);
  const ClusterTree& tree = a->col_tree();
  const auto expanded = a->col_basis().expand(tree);
  Index checked = 0;
  for (int t = 0; t < tree.node_count(); ++t) {
    const ClusterNode& node = tree.node(t);
    const Matrix& basis = expanded[static_cast<std::size_t>(t)];
    CHECK(a->col_basis().rank(t) <= 10);
    if (basis.cols() == 0) continue;
    CHECK((basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols())).norm() < 1e-10);
    const Matrix strip = column_strip(dense, *a, t);
    CHECK((strip - strip * basis * basis.transpose()).norm() <= 1e-10 * strip.norm());
    if (!node.is_leaf()) {
      Matrix stacked(node.size(), basis.cols());
      for (int s : node.children) {
        const ClusterNode& son = tree.node(s);
        stacked.middleRows(son.begin - node.begin, son.size()) =
            expanded[static_cast<std::size_t>(s)] * a->col_basis().transfer[static_cast<std::size_t>(s)];
      }
      CHECK((stacked - basis).norm() <= 1e-10 * basis.norm());
      ++checked;
    } else {
      const Eigen::JacobiSVD<Matrix> svd(a->col_basis().leaf[static_cast<std::size_t>(t)]);
      const Vector& sv = svd.singularValues();
      CHECK(sv[sv.size() - 1] > 1e-12 * sv[0]);
    }
  }
  CHECK(checked > 0);
  CHECK(rel_err(a->reconstruct(), dense) < 1e-10);
}

TEST_CASE("recompression at machine precision changes nothing") {
  const Fixture f = make_fixture(KernelKind::single_layer, 12, 1e-6);
  const H2Matrix b = recompress(*f.h2, 1e-15);
  for (int t = 0; t < f.tree->node_count(); ++t) {
    CHECK(b.row_basis().rank(t) <= f.h2->row_basis().rank(t));
    CHECK(b.col_basis().rank(t) <= f.h2->col_basis().rank(t));
  }
  CHECK(sampled_operator_error(*f.h2, b, 10, 2) <= 1e-12);
}

TEST_CASE("recompression recovers a planted rank") {
  const PointSet p = random_points(64, 11, true);
  H2BuildOptions options;
  options.fixed_rank = 5;
  const auto a = h2_from(rank_one_plus_diagonal(64, 3), p, 4, 1.0, options);
  Index max_rank = 0;
  for (Index r : a->col_basis().ranks) max_rank = std::max(max_rank, r);
  REQUIRE(max_rank > 1);
  const H2Matrix b = recompress(*a, 1e-8);
  for (const BlockPair& pair : b.partition().far) {
    CHECK(b.row_basis().rank(pair.row) == 1);
    CHECK(b.col_basis().rank(pair.col) == 1);
  }
  CHECK(sampled_operator_error(*a, b, 10, 5) < 1e-8);
}

TEST_CASE("recompression at 1e-2 shrinks storage with bounded error") {
  const Fixture f = make_fixture(KernelKind::single_layer, 16, 1e-6);
  const H2Matrix b = recompress(*f.h2, 1e-2);
  const H2Storage sa = f.h2->storage(), sb = b.storage();
  CHECK(sb.basis_doubles + sb.coupling_doubles < sa.basis_doubles + sa.coupling_doubles);
  CHECK(sampled_operator_error(*f.h2, b, 100, 17) <= 0.1);
  CHECK_THROWS_AS(recompress(*f.h2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(recompress(*f.h2, 1.0), std::invalid_argument);
}

TEST_CASE("recompression never raises a rank") {
  SplitMix64 rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    const KernelKind kind = trial % 2 ? KernelKind::hypersingular : KernelKind::single_layer;
    const Fixture f = make_fixture(kind, 6 + trial, 1e-8, 8 + trial);
    const double delta = std::pow(10.0, -1.0 - 10.0 * rng.uniform());
    const H2Matrix b = recompress(*f.h2, delta);
    for (int t = 0; t < f.tree->node_count(); ++t) {
      CHECK(b.row_basis().rank(t) <= f.h2->row_basis().rank(t));
      CHECK(b.col_basis().rank(t) <= f.h2->col_basis().rank(t));
    }
  }
}

TEST_CASE("binary container round trip") {
  const Fixture f = make_fixture(KernelKind::hypersingular, 10, 1e-6);
  std::stringstream io;
  save_h2(*f.h2, io);
  const std::string bytes = io.str();
  const H2Matrix back = load_h2(io);
  const Vector x = SplitMix64(3).symmetric_vector(f.h2->cols());
  CHECK(back.matvec(x) == f.h2->matvec(x));
  CHECK(back.shares_tree());
  CHECK(back.partition().far == f.h2->partition().far);

  std::istringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_h2(truncated), std::invalid_argument);
  std::string corrupt = bytes;
  corrupt[0] = 'X';
  std::istringstream bad(corrupt);
  CHECK_THROWS_AS(load_h2(bad), std::invalid_argument);
}

TEST_CASE("construction input checks") {
  const Fixture f = make_fixture(KernelKind::single_layer, 4, 1e-6, 4);
  H2BuildOptions options;
  CHECK_THROWS_AS(build_h2_dense(Matrix::Zero(5, 5), f.tree, f.tree, f.partition, options), std::invalid_argument);
  options.tol = 0.0;
  CHECK_THROWS_AS(build_h2_dense(f.dense, f.tree, f.tree, f.partition, options), std::invalid_argument);
}
