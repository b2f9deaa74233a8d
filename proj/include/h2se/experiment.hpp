#pragma once

#include "h2se/common.hpp"
#include "h2se/geometry.hpp"
#include "h2se/h2matrix.hpp"
#include "h2se/kernels.hpp"
#include "h2se/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace h2se {

enum class RhsMode { random, manufactured, zero };

RhsMode parse_rhs_mode(std::string_view name);
std::string_view to_string(RhsMode mode);

/// Everything that determines a run.
struct ExperimentSpec {
  KernelKind problem = KernelKind::single_layer;
  int n = 16;
  double h2_tol = 1e-6;
  Index leaf_size = 25;
  double eta = 1.0;
  Index dense_cap = kDefaultDenseCap;
  std::uint64_t seed = 1;
  RhsMode rhs = RhsMode::random;
  SolverConfig solver;
  std::string output_dir = "h2se-out";
  /// Benchmark grid.
  std::vector<int> grid_n;
  std::vector<Method> methods;
  int jobs = 1;

  void validate() const;
};

/// Sets one field from its textual form. Keys: problem, n, h2_tol, leaf_size,
/// eta, dense_cap, seed, rhs, output_dir, method, eps, delta_ilut, fill_max,
/// pivot_tol, delta_svd, k_schur, restart, maxit, direct_cap, grid_n, methods,
/// jobs. Lists are comma separated.
void set_spec_option(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// key=value lines; blank lines and lines starting with '#' are skipped.
void read_spec(std::istream& in, ExperimentSpec& spec);
/// Resolved configuration in the same key=value format.
void write_spec(std::ostream& out, const ExperimentSpec& spec);

/// Unit square for the single layer problem, the curved open surface for the
/// hypersingular one.
TriangleMesh make_problem_mesh(KernelKind problem, int n);

struct Problem {
  std::optional<TriangleMesh> mesh;
  std::shared_ptr<const H2Matrix> h2;
  double build_seconds = 0.0;
};

/// Mesh, dense assembly (refused above dense_cap), tree, partition, H2 build.
/// A given mesh replaces the generated one.
Problem build_problem(const ExperimentSpec& spec, std::optional<TriangleMesh> mesh = std::nullopt);

/// random: SplitMix64(seed) values in [-1, 1); manufactured: A q for
/// q = sin(2 pi x) cos(2 pi y) at the centroids; zero: all zeros.
Vector make_rhs(const Problem& problem, const ExperimentSpec& spec);

struct CellResult {
  KernelKind problem = KernelKind::single_layer;
  int n_mesh = 0;
  Index n = 0;
  Method method = Method::direct_se;
  /// ok, not_converged, refused or failed.
  std::string status;
  std::string reason;
  SolveResult result;

  bool ok() const { return status == "ok"; }
};

/// Never throws for infeasible or failing solves; those become records.
CellResult run_cell(const Problem& problem, const Vector& y, const ExperimentSpec& spec, Method method);

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const CellResult& cell);
void write_history_header(std::ostream& out);
void write_history_rows(std::ostream& out, const CellResult& cell);
void write_solution(std::ostream& out, const Vector& x);

/// Runs grid_n x methods. Cells of one N share the problem; with jobs > 1
/// the methods of one N run concurrently. Rows are written in grid order.
std::vector<CellResult> run_benchmark(const ExperimentSpec& spec, std::ostream& summary,
                                      std::ostream& history);

}  // namespace h2se
