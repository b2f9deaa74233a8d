#include "h2se/experiment.hpp"
#include "h2se/seform.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using namespace h2se;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitPartial = 2;

const char* const kSpecKeys[] = {"problem", "n",          "h2_tol",    "leaf_size", "eta",     "dense_cap",
                                 "seed",    "rhs",        "output_dir", "method",   "eps",     "delta_ilut",
                                 "fill_max", "pivot_tol", "delta_svd", "k_schur",   "restart", "maxit",
                                 "direct_cap", "grid_n",  "methods",   "jobs"};

struct SpecFlags {
  std::string config;
  std::map<std::string, std::string> values;
};

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

void add_spec_flags(CLI::App* cmd, SpecFlags& flags) {
  cmd->add_option("--config", flags.config, "key=value file; flags override it")->check(CLI::ExistingFile);
  for (const char* key : kSpecKeys) cmd->add_option(flag_name(key), flags.values[key], std::string("spec field ") + key);
}

ExperimentSpec resolve_spec(CLI::App* cmd, const SpecFlags& flags) {
  ExperimentSpec spec;
  if (!flags.config.empty()) {
    std::ifstream in(flags.config);
    read_spec(in, spec);
  }
  for (const char* key : kSpecKeys)
    if (cmd->count(flag_name(key)) > 0) set_spec_option(spec, key, flags.values.at(key));
  spec.validate();
  return spec;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void echo_config(const ExperimentSpec& spec) {
  fs::create_directories(spec.output_dir);
  auto out = open_output(fs::path(spec.output_dir) / "config.txt");
  write_spec(out, spec);
}

std::shared_ptr<const H2Matrix> load_h2_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return std::make_shared<const H2Matrix>(load_h2(in));
}

int run_generate(KernelKind problem, int n, const std::string& output) {
  require(n >= 1, "n must be at least 1");
  const TriangleMesh mesh = make_problem_mesh(problem, n);
  auto out = open_output(output);
  write_mesh(mesh, out);
  std::cout << "wrote " << output << ": " << mesh.vertices.size() << " vertices, " << mesh.size() << " triangles\n";
  return kExitOk;
}

int run_assemble(const ExperimentSpec& spec, const std::string& mesh_path, const std::string& output,
                 const std::string& mm_path, const std::string& manifest_path) {
  std::optional<TriangleMesh> mesh;
  if (!mesh_path.empty()) {
    std::ifstream in(mesh_path);
    if (!in) throw std::runtime_error("cannot read " + mesh_path);
    mesh = read_mesh(in);
  }
  const Problem p = build_problem(spec, std::move(mesh));
  {
    auto out = open_output(output, std::ios::binary);
    save_h2(*p.h2, out);
  }
  const H2Storage st = p.h2->storage();
  std::cout << "wrote " << output << ": N = " << p.h2->rows() << ", far pairs " << p.h2->partition().far.size()
            << ", close pairs " << p.h2->partition().close.size() << ", " << st.bytes() << " bytes, built in "
            << p.build_seconds << " s\n";
  if (!mm_path.empty() || !manifest_path.empty()) {
    const SEForm se = assemble_se(*p.h2);
    if (!mm_path.empty()) {
      auto out = open_output(mm_path);
      se.matrix().write_matrix_market(out);
    }
    if (!manifest_path.empty()) {
      auto out = open_output(manifest_path);
      se.write_manifest(out);
    }
  }
  return kExitOk;
}

int run_solve(const ExperimentSpec& spec, const std::string& h2_path) {
  echo_config(spec);
  const fs::path dir(spec.output_dir);
  Problem p;
  CellResult cell;
  try {
    if (h2_path.empty()) {
      p = build_problem(spec);
    } else {
      p.h2 = load_h2_file(h2_path);
      if (spec.rhs == RhsMode::manufactured) p.mesh = make_problem_mesh(spec.problem, spec.n);
    }
    const Vector y = make_rhs(p, spec);
    cell = run_cell(p, y, spec, spec.solver.method);
  } catch (const InfeasibleError& e) {
    cell.problem = spec.problem;
    cell.n_mesh = spec.n;
    cell.n = 2 * static_cast<Index>(spec.n) * spec.n;
    cell.method = spec.solver.method;
    cell.status = "refused";
    cell.reason = e.what();
  }
  {
    auto out = open_output(dir / "summary.csv");
    write_summary_header(out);
    write_summary_row(out, cell);
  }
  {
    auto out = open_output(dir / "history.csv");
    cell.result.report.write_csv(out, {{"status", cell.status}, {"N", std::to_string(cell.n)}});
  }
  if (cell.result.x.size() > 0) {
    auto out = open_output(dir / "solution.txt");
    write_solution(out, cell.result.x);
  }
  const IterationReport& r = cell.result.report;
  std::cout << to_string(cell.method) << " N = " << cell.n << ": " << cell.status;
  if (!cell.reason.empty()) std::cout << " (" << cell.reason << ")";
  if (cell.status != "refused" && cell.status != "failed")
    std::cout << ", " << r.iterations << " iterations, residual " << r.final_residual << ", setup "
              << r.setup_seconds << " s, solve " << r.solve_seconds << " s";
  std::cout << '\n';
  return cell.ok() ? kExitOk : kExitPartial;
}

int run_benchmark_cmd(const ExperimentSpec& spec) {
  echo_config(spec);
  const fs::path dir(spec.output_dir);
  auto summary = open_output(dir / "benchmark.csv");
  auto history = open_output(dir / "histories.csv");
  const auto cells = run_benchmark(spec, summary, history);
  std::size_t failures = 0;
  for (const CellResult& c : cells) {
    std::cout << to_string(c.problem) << " N = " << c.n << ' ' << to_string(c.method) << ": " << c.status;
    if (!c.reason.empty()) std::cout << " (" << c.reason << ")";
    std::cout << '\n';
    if (!c.ok()) ++failures;
  }
  std::cout << cells.size() << " cells, " << failures << " not ok\n";
  return failures == 0 ? kExitOk : kExitPartial;
}

int run_inspect(const ExperimentSpec& spec, const std::string& h2_path) {
  std::shared_ptr<const H2Matrix> a = h2_path.empty() ? build_problem(spec).h2 : load_h2_file(h2_path);
  const SEForm se = assemble_se(*a);
  se.write_manifest(std::cout);
  return se.satisfies_size_bound() ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"H2 matrices, their sparse extended form and SE-based solvers"};
  app.require_subcommand(1);

  std::string problem_name = "single_layer";
  int n = 16;
  std::string output;
  auto* gen = app.add_subcommand("generate", "write a problem mesh");
  gen->add_option("--problem", problem_name, "single_layer (electrostatic) or hypersingular");
  gen->add_option("--n", n, "grid parameter; the mesh has 2n^2 triangles");
  gen->add_option("-o,--output", output, "mesh file")->required();

  SpecFlags assemble_flags;
  std::string mesh_path, mm_path, manifest_path, h2_out;
  auto* assemble = app.add_subcommand("assemble", "build and save the H2 matrix");
  add_spec_flags(assemble, assemble_flags);
  assemble->add_option("--mesh", mesh_path, "mesh file to use instead of the generated one")
      ->check(CLI::ExistingFile);
  assemble->add_option("-o,--output", h2_out, "H2 container file")->required();
  assemble->add_option("--matrix-market", mm_path, "also write SE(A) in Matrix Market format");
  assemble->add_option("--manifest", manifest_path, "also write the SE layout manifest");

  SpecFlags solve_flags;
  std::string solve_h2;
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem with one method");
  add_spec_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--h2", solve_h2, "saved H2 matrix to solve with")->check(CLI::ExistingFile);

  SpecFlags bench_flags;
  auto* bench = app.add_subcommand("benchmark", "run a grid of sizes and methods");
  add_spec_flags(bench, bench_flags);

  SpecFlags inspect_flags;
  std::string inspect_h2;
  auto* inspect = app.add_subcommand("inspect", "print the SE layout manifest and the size bound check");
  add_spec_flags(inspect, inspect_flags);
  inspect->add_option("--h2", inspect_h2, "saved H2 matrix")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (gen->parsed()) return run_generate(parse_kernel_kind(problem_name), n, output);
    if (assemble->parsed())
      return run_assemble(resolve_spec(assemble, assemble_flags), mesh_path, h2_out, mm_path, manifest_path);
    if (solve_cmd->parsed()) return run_solve(resolve_spec(solve_cmd, solve_flags), solve_h2);
    if (bench->parsed()) return run_benchmark_cmd(resolve_spec(bench, bench_flags));
    if (inspect->parsed()) return run_inspect(resolve_spec(inspect, inspect_flags), inspect_h2);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const InfeasibleError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kExitPartial;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
