#include "h2se/experiment.hpp"

#include "h2se/rng.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <istream>
#include <numbers>
#include <ostream>

namespace h2se {

namespace {

using Clock = std::chrono::steady_clock;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument("option '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto part = trim(text.substr(0, comma));
    if (!part.empty()) parts.push_back(part);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return parts;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

RhsMode parse_rhs_mode(std::string_view name) {
  if (name == "random") return RhsMode::random;
  if (name == "manufactured") return RhsMode::manufactured;
  if (name == "zero") return RhsMode::zero;
  throw std::invalid_argument("unknown rhs mode '" + std::string(name) + "' (expected random, manufactured or zero)");
}

std::string_view to_string(RhsMode mode) {
  switch (mode) {
    case RhsMode::random: return "random";
    case RhsMode::manufactured: return "manufactured";
    case RhsMode::zero: return "zero";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  require(n >= 1, "n must be at least 1");
  require(h2_tol > 0.0 && h2_tol < 1.0, "h2_tol must lie in (0, 1)");
  require(leaf_size >= 1, "leaf_size must be at least 1");
  require(eta > 0.0, "eta must be positive");
  require(dense_cap >= 1, "dense_cap must be positive");
  require(jobs >= 1, "jobs must be at least 1");
  for (int g : grid_n) require(g >= 1, "grid_n entries must be at least 1");
  solver.validate();
}

void set_spec_option(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  value = trim(value);
  SolverConfig& s = spec.solver;
  if (key == "problem") spec.problem = parse_kernel_kind(value);
  else if (key == "n") spec.n = parse_number<int>(key, value);
  else if (key == "h2_tol") spec.h2_tol = parse_number<double>(key, value);
  else if (key == "leaf_size") spec.leaf_size = parse_number<Index>(key, value);
  else if (key == "eta") spec.eta = parse_number<double>(key, value);
  else if (key == "dense_cap") spec.dense_cap = parse_number<Index>(key, value);
  else if (key == "seed") spec.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "rhs") spec.rhs = parse_rhs_mode(value);
  else if (key == "output_dir") spec.output_dir = std::string(value);
  else if (key == "method") s.method = parse_method(value);
  else if (key == "eps") s.eps = parse_number<double>(key, value);
  else if (key == "delta_ilut") s.delta_ilut = parse_number<double>(key, value);
  else if (key == "fill_max") s.fill_max = parse_number<Index>(key, value);
  else if (key == "pivot_tol") s.pivot_tol = parse_number<double>(key, value);
  else if (key == "delta_svd") s.delta_svd = parse_number<double>(key, value);
  else if (key == "k_schur") s.k_schur = parse_number<Index>(key, value);
  else if (key == "restart") s.restart = parse_number<Index>(key, value);
  else if (key == "maxit") s.maxit = parse_number<Index>(key, value);
  else if (key == "direct_cap") s.direct_cap = parse_number<Index>(key, value);
  else if (key == "jobs") spec.jobs = parse_number<int>(key, value);
  else if (key == "grid_n") {
    spec.grid_n.clear();
    for (auto part : split_list(value)) spec.grid_n.push_back(parse_number<int>(key, part));
  } else if (key == "methods") {
    spec.methods.clear();
    for (auto part : split_list(value)) spec.methods.push_back(parse_method(part));
  } else {
    throw std::invalid_argument("unknown option '" + std::string(key) + "'");
  }
}

void read_spec(std::istream& in, ExperimentSpec& spec) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key=value");
    set_spec_option(spec, trim(text.substr(0, eq)), text.substr(eq + 1));
  }
}

void write_spec(std::ostream& out, const ExperimentSpec& spec) {
  const SolverConfig& s = spec.solver;
  out << "problem=" << to_string(spec.problem) << '\n'
      << "n=" << spec.n << '\n'
      << "h2_tol=" << format_double(spec.h2_tol) << '\n'
      << "leaf_size=" << spec.leaf_size << '\n'
      << "eta=" << format_double(spec.eta) << '\n'
      << "dense_cap=" << spec.dense_cap << '\n'
      << "seed=" << spec.seed << '\n'
      << "rhs=" << to_string(spec.rhs) << '\n'
      << "output_dir=" << spec.output_dir << '\n'
      << "method=" << to_string(s.method) << '\n'
      << "eps=" << format_double(s.eps) << '\n'
      << "delta_ilut=" << format_double(s.delta_ilut) << '\n'
      << "fill_max=" << s.fill_max << '\n'
      << "pivot_tol=" << format_double(s.pivot_tol) << '\n'
      << "delta_svd=" << format_double(s.delta_svd) << '\n'
      << "k_schur=" << s.k_schur << '\n'
      << "restart=" << s.restart << '\n'
      << "maxit=" << s.maxit << '\n'
      << "direct_cap=" << s.direct_cap << '\n'
      << "jobs=" << spec.jobs << '\n';
  out << "grid_n=";
  for (std::size_t i = 0; i < spec.grid_n.size(); ++i) out << (i ? "," : "") << spec.grid_n[i];
  out << "\nmethods=";
  for (std::size_t i = 0; i < spec.methods.size(); ++i) out << (i ? "," : "") << to_string(spec.methods[i]);
  out << '\n';
}

TriangleMesh make_problem_mesh(KernelKind problem, int n) {
  return problem == KernelKind::single_layer ? make_unit_square_mesh(n) : make_open_surface_mesh(n);
}

Problem build_problem(const ExperimentSpec& spec, std::optional<TriangleMesh> mesh) {
  const Index triangles = mesh ? mesh->size() : 2 * static_cast<Index>(spec.n) * spec.n;
  if (triangles > spec.dense_cap)
    throw InfeasibleError("N = " + std::to_string(triangles) + " exceeds the dense assembly cap " +
                          std::to_string(spec.dense_cap));
  const auto t0 = Clock::now();
  Problem p;
  p.mesh = mesh ? std::move(*mesh) : make_problem_mesh(spec.problem, spec.n);
  const Matrix dense = assemble_dense(*p.mesh, Kernel{spec.problem}, spec.dense_cap);
  auto tree = std::make_shared<const ClusterTree>(ClusterTree::build(p.mesh->points(), spec.leaf_size));
  const BlockPartition partition = build_partition(*tree, *tree, spec.eta);
  H2BuildOptions options;
  options.tol = spec.h2_tol;
  p.h2 = std::make_shared<const H2Matrix>(build_h2_dense(dense, tree, tree, partition, options));
  p.build_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return p;
}

Vector make_rhs(const Problem& problem, const ExperimentSpec& spec) {
  const Index n = problem.h2->rows();
  switch (spec.rhs) {
    case RhsMode::zero:
      return Vector::Zero(n);
    case RhsMode::manufactured: {
      require(problem.mesh.has_value(), "manufactured right-hand side needs the mesh");
      const auto apply = [&](const Vector& q) { return problem.h2->matvec(q); };
      return manufactured_rhs(*problem.mesh, apply, [](const Vec3& c) {
        return std::sin(2.0 * std::numbers::pi * c.x()) * std::cos(2.0 * std::numbers::pi * c.y());
      });
    }
    case RhsMode::random:
      break;
  }
  SplitMix64 rng(spec.seed);
  return rng.symmetric_vector(n);
}

CellResult run_cell(const Problem& problem, const Vector& y, const ExperimentSpec& spec, Method method) {
  CellResult cell;
  cell.problem = spec.problem;
  cell.n_mesh = spec.n;
  cell.n = problem.h2->rows();
  cell.method = method;
  SolverConfig config = spec.solver;
  config.method = method;
  try {
    cell.result = solve(*problem.h2, y, config);
    cell.status = cell.result.report.converged ? "ok" : "not_converged";
    if (!cell.result.report.converged)
      cell.reason = cell.result.report.stagnated ? "stagnated" : "iteration limit reached";
  } catch (const InfeasibleError& e) {
    cell.status = "refused";
    cell.reason = e.what();
  } catch (const std::exception& e) {
    cell.status = "failed";
    cell.reason = e.what();
  }
  cell.result.report.method = std::string(to_string(method));
  return cell;
}

void write_summary_header(std::ostream& out) {
  out << "problem,n_mesh,N,N_H,method,status,iterations,inner_iterations,final_residual,residual_original,"
         "assembly_seconds,setup_seconds,solve_seconds,total_seconds,preconditioner_bytes,zero_pivots,reason\n";
}

void write_summary_row(std::ostream& out, const CellResult& cell) {
  const IterationReport& r = cell.result.report;
  std::string reason = cell.reason;
  for (char& c : reason)
    if (c == ',' || c == '\n') c = ';';
  out << to_string(cell.problem) << ',' << cell.n_mesh << ',' << cell.n << ',' << r.extended_size << ','
      << to_string(cell.method) << ',' << cell.status << ',' << r.iterations << ',' << r.inner_iterations << ','
      << format_short(r.final_residual) << ',' << format_short(r.residual_original) << ','
      << format_short(r.assembly_seconds) << ',' << format_short(r.setup_seconds) << ','
      << format_short(r.solve_seconds) << ',' << format_short(r.total_seconds()) << ',' << r.peak_extra_bytes
      << ',' << r.zero_pivots << ',' << reason << '\n';
}

void write_history_header(std::ostream& out) { out << "problem,N,method,iteration,relative_residual\n"; }

void write_history_rows(std::ostream& out, const CellResult& cell) {
  const auto& h = cell.result.report.residual_history;
  for (std::size_t i = 0; i < h.size(); ++i)
    out << to_string(cell.problem) << ',' << cell.n << ',' << to_string(cell.method) << ',' << i << ','
        << format_double(h[i]) << '\n';
}

void write_solution(std::ostream& out, const Vector& x) {
  for (Index i = 0; i < x.size(); ++i) out << format_double(x[i]) << '\n';
}

std::vector<CellResult> run_benchmark(const ExperimentSpec& spec, std::ostream& summary, std::ostream& history) {
  write_summary_header(summary);
  write_history_header(history);
  std::vector<CellResult> all;
  for (int n : spec.grid_n) {
    ExperimentSpec cell_spec = spec;
    cell_spec.n = n;
    std::vector<CellResult> cells;
    try {
      const Problem problem = build_problem(cell_spec);
      const Vector y = make_rhs(problem, cell_spec);
      if (spec.jobs <= 1) {
        for (Method m : spec.methods) cells.push_back(run_cell(problem, y, cell_spec, m));
      } else {
        std::size_t next = 0;
        while (next < spec.methods.size()) {
          std::vector<std::future<CellResult>> batch;
          for (int j = 0; j < spec.jobs && next < spec.methods.size(); ++j, ++next)
            batch.push_back(std::async(std::launch::async, run_cell, std::cref(problem), std::cref(y),
                                       std::cref(cell_spec), spec.methods[next]));
          for (auto& f : batch) cells.push_back(f.get());
        }
      }
    } catch (const std::exception& e) {
      const bool refused = dynamic_cast<const InfeasibleError*>(&e) != nullptr;
      cells.clear();
      for (Method m : spec.methods) {
        CellResult c;
        c.problem = spec.problem;
        c.n_mesh = n;
        c.n = 2 * static_cast<Index>(n) * n;
        c.method = m;
        c.status = refused ? "refused" : "failed";
        c.reason = e.what();
        c.result.report.method = std::string(to_string(m));
        cells.push_back(std::move(c));
      }
    }
    for (const CellResult& c : cells) {
      write_summary_row(summary, c);
      write_history_rows(history, c);
      all.push_back(c);
    }
    summary.flush();
    history.flush();
  }
  return all;
}

}  // namespace h2se
