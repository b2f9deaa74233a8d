#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace testing;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("spec options parse and round trip") {
  ExperimentSpec spec;
  set_spec_option(spec, "problem", "electrostatic");
  set_spec_option(spec, "n", "12");
  set_spec_option(spec, "h2_tol", "1e-5");
  set_spec_option(spec, "method", "se_ilut");
  set_spec_option(spec, "grid_n", "4,8");
  set_spec_option(spec, "methods", "se_ilut,revschur_svdse");
  set_spec_option(spec, "rhs", "manufactured");
  set_spec_option(spec, "seed", "18446744073709551615");
  CHECK(spec.problem == KernelKind::single_layer);
  CHECK(spec.n == 12);
  CHECK(spec.grid_n == std::vector<int>{4, 8});
  CHECK(spec.methods == std::vector<Method>{Method::se_ilut, Method::revschur_svdse});
  CHECK(spec.seed == 18446744073709551615ull);

  std::stringstream io;
  write_spec(io, spec);
  ExperimentSpec back;
  read_spec(io, back);
  std::stringstream again;
  write_spec(again, back);
  CHECK(again.str() == io.str());

  CHECK_THROWS_AS(set_spec_option(spec, "n", "twelve"), std::invalid_argument);
  CHECK_THROWS_AS(set_spec_option(spec, "n", "12x"), std::invalid_argument);
  CHECK_THROWS_AS(set_spec_option(spec, "colour", "red"), std::invalid_argument);
  std::istringstream bad("# comment\n\nn=4\nno equals sign\n");
  CHECK_THROWS_AS(read_spec(bad, spec), std::invalid_argument);
  spec.n = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("right-hand side modes") {
  ExperimentSpec spec;
  spec.n = 6;
  const Problem p = build_problem(spec);
  const Vector a = make_rhs(p, spec);
  CHECK(a == SplitMix64(spec.seed).symmetric_vector(72));
  spec.rhs = RhsMode::zero;
  CHECK(make_rhs(p, spec).isZero(0.0));
  spec.rhs = RhsMode::manufactured;
  Vector q(72);
  for (Index i = 0; i < 72; ++i) {
    const Vec3& c = p.mesh->centroids[static_cast<std::size_t>(i)];
    q[i] = std::sin(2 * std::numbers::pi * c.x()) * std::cos(2 * std::numbers::pi * c.y());
  }
  CHECK(rel_err(make_rhs(p, spec), p.h2->matvec(q)) < 1e-15);
}

TEST_CASE("dense cap refusal") {
  ExperimentSpec spec;
  spec.n = 20;
  spec.dense_cap = 100;
  CHECK_THROWS_AS(build_problem(spec), InfeasibleError);
}

TEST_CASE("benchmark grid records every cell and keeps going") {
  ExperimentSpec spec;
  spec.grid_n = {6, 8};
  spec.methods = {Method::direct_se, Method::se_ilut, Method::revschur_svdse};
  spec.solver.direct_cap = 150;
  std::ostringstream summary, history;
  const auto cells = run_benchmark(spec, summary, history);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0].status == "ok");
  CHECK(cells[3].status == "refused");
  CHECK(cells[4].ok());
  CHECK(cells[5].ok());
  const auto rows = lines(summary.str());
  CHECK(rows.size() == 7);
  CHECK(rows[0].rfind("problem,n_mesh,N,N_H,method,status", 0) == 0);
  CHECK(rows[4].find("refused") != std::string::npos);
  CHECK(lines(history.str()).size() > 7);
}

TEST_CASE("empty grid writes only headers") {
  ExperimentSpec spec;
  std::ostringstream summary, history;
  CHECK(run_benchmark(spec, summary, history).empty());
  CHECK(lines(summary.str()).size() == 1);
  CHECK(lines(history.str()).size() == 1);
}

TEST_CASE("runs are deterministic, also with concurrent cells") {
  ExperimentSpec spec;
  spec.grid_n = {8};
  spec.methods = {Method::se_ilut, Method::revschur_ilut, Method::revschur_svdse};
  std::ostringstream s1, h1, s2, h2;
  const auto a = run_benchmark(spec, s1, h1);
  spec.jobs = 3;
  const auto b = run_benchmark(spec, s2, h2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].method == b[i].method);
    CHECK(a[i].result.report.iterations == b[i].result.report.iterations);
    CHECK(a[i].result.x == b[i].result.x);
    std::ostringstream xa, xb;
    write_solution(xa, a[i].result.x);
    write_solution(xb, b[i].result.x);
    CHECK(xa.str() == xb.str());
  }
  CHECK(h1.str() == h2.str());
}
