#include "support.hpp"

#include "h2se/solvers.hpp"

#include <doctest.h>

using namespace testing;

namespace {

SolverConfig config_for(Method m) {
  SolverConfig c;
  c.method = m;
  return c;
}

const Fixture& fixture_512() {
  static const Fixture f = make_fixture(KernelKind::single_layer, 16);
  return f;
}

}  // namespace

TEST_CASE("method names and configuration checks") {
  for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("gauss_seidel"), std::invalid_argument);
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.eps = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.delta_svd = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.k_schur = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.restart = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("block preconditioner acts only on the coupling square") {
  const Fixture f = make_fixture(KernelKind::single_layer, 10, 1e-6, 8);
  const SEForm se = assemble_se(*f.h2);
  const BlockPreconditioner b(se, IlutOptions{});
  const BlockSpan sq = b.span();
  REQUIRE(sq.size > 0);
  SplitMix64 rng(3);
  Vector v = rng.symmetric_vector(se.size());
  v.segment(sq.begin, sq.size).setZero();
  Vector out;
  b.apply(v, out);
  CHECK(out == v);

  const Vector p = rng.symmetric_vector(se.size()), q = rng.symmetric_vector(se.size());
  Vector bp, bq, bpq;
  b.apply(p, bp);
  b.apply(q, bq);
  b.apply(Vector(2.0 * p - 3.0 * q), bpq);
  CHECK(rel_err(bpq, Vector(2.0 * bp - 3.0 * bq)) < 1e-12);
}

TEST_CASE("direct solve of the extended form") {
  PointSet pts = random_points(256, 31, true);
  for (double& w : pts.weights) w = 1.0 / 256;
  const auto a = h2_from(assemble_dense(pts, Kernel{}), pts, 16, 1.0, {});
  const Vector y = SplitMix64(8).symmetric_vector(256);
  const SolveResult r = solve(*a, y, config_for(Method::direct_se));
  CHECK(rel_err(r.x, dense_solve(a->reconstruct(), y)) <= 1e-8);
  CHECK(r.report.extended_size == assemble_se(*a).size());
  CHECK(r.report.peak_extra_bytes > 0);

  SolverConfig capped = config_for(Method::direct_se);
  capped.direct_cap = 100;
  CHECK_THROWS_AS(solve(*a, y, capped), InfeasibleError);
}

TEST_CASE("direct solve without far field is the close system") {
  PointSet pts = random_points(20, 4, true);
  const Matrix dense = assemble_dense(pts, Kernel{});
  const auto a = h2_from(dense, pts, 25, 1.0, {});
  const Vector y = SplitMix64(1).symmetric_vector(20);
  CHECK(rel_err(solve(*a, y, config_for(Method::direct_se)).x, dense_solve(dense, y)) < 1e-12);
}

TEST_CASE("exact limits of the iterative methods") {
  const Fixture& f = fixture_512();
  const Vector y = SplitMix64(2).symmetric_vector(512);
  SolverConfig c = config_for(Method::se_ilut);
  c.delta_ilut = 0.0;
  c.fill_max = -1;
  const SolveResult r = solve(*f.h2, y, c);
  CHECK(r.report.converged);
  CHECK(r.report.iterations == 1);

  c.method = Method::revschur_ilut;
  c.k_schur = 30;
  const SolveResult s = solve(*f.h2, y, c);
  CHECK(s.report.converged);
  CHECK(s.report.iterations <= 2);
}

TEST_CASE("methods agree with the dense solution of the H2 operator") {
  const Fixture& f = fixture_512();
  const Vector y = SplitMix64(3).symmetric_vector(512);
  const Vector x_dense = dense_solve(f.h2->reconstruct(), y);
  for (Method m : {Method::direct_se, Method::se_ilut, Method::revschur_ilut, Method::revschur_svdse}) {
    const SolveResult r = solve(*f.h2, y, config_for(m));
    CHECK_MESSAGE(r.report.converged, to_string(m));
    CHECK_MESSAGE(rel_err(r.x, x_dense) <= 100 * 1e-8, to_string(m));
    CHECK(r.report.residual_original <= 1e-8);
    CHECK(r.report.residual_history.size() >= 1);
  }
}

TEST_CASE("se_block on the N = 512 single layer system (diagnostic)") {
  const Fixture& f = fixture_512();
  const Vector y = SplitMix64(3).symmetric_vector(512);
  const SolveResult b = solve(*f.h2, y, config_for(Method::se_block));
  const SolveResult i = solve(*f.h2, y, config_for(Method::se_ilut));
  CHECK(i.report.converged);
  // se_block is reported, not asserted: it stalls on this representation.
  MESSAGE("se_block: converged " << b.report.converged << ", " << b.report.iterations << " iterations, residual "
                                 << b.report.final_residual << ", setup " << b.report.setup_seconds
                                 << " s; se_ilut: " << i.report.iterations << " iterations, setup "
                                 << i.report.setup_seconds << " s");
  CHECK(b.report.residual_history.front() == 1.0);
  CHECK(b.x.size() == 512);
}

TEST_CASE("recompressed reverse Schur needs less storage") {
  const Fixture& f = fixture_512();
  const Vector y = SplitMix64(4).symmetric_vector(512);
  const SolveResult full = solve(*f.h2, y, config_for(Method::revschur_ilut));
  const SolveResult svd = solve(*f.h2, y, config_for(Method::revschur_svdse));
  CHECK(full.report.converged);
  CHECK(svd.report.converged);
  CHECK(svd.report.peak_extra_bytes < full.report.peak_extra_bytes);
  CHECK(svd.report.extended_size < full.report.extended_size);
  CHECK(svd.report.inner_iterations > 0);
}

TEST_CASE("zero right-hand side gives the zero solution") {
  const Fixture f = make_fixture(KernelKind::hypersingular, 8, 1e-6, 8);
  for (Method m : kAllMethods) {
    const SolveResult r = solve(*f.h2, Vector::Zero(f.h2->rows()), config_for(m));
    CHECK_MESSAGE(r.x.isZero(0.0), to_string(m));
    CHECK(r.report.iterations <= 1);
  }
}

TEST_CASE("hypersingular problem converges with every preconditioned method") {
  const Fixture f = make_fixture(KernelKind::hypersingular, 16);
  const Vector y = SplitMix64(5).symmetric_vector(512);
  const Vector x_dense = dense_solve(f.h2->reconstruct(), y);
  for (Method m : {Method::se_ilut, Method::revschur_ilut, Method::revschur_svdse}) {
    const SolveResult r = solve(*f.h2, y, config_for(m));
    CHECK_MESSAGE(r.report.converged, to_string(m));
    CHECK_MESSAGE(rel_err(r.x, x_dense) <= 100 * 1e-8, to_string(m));
  }
}
