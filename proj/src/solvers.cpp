#include "h2se/solvers.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <chrono>
#include <string>

namespace h2se {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class EigenSparseLu final : public DirectSolver {
 public:
  void factorize(const SparseMatrix& m) override {
    Eigen::SparseMatrix<double> a = m.to_eigen();
    a.makeCompressed();
    lu_.analyzePattern(a);
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("sparse LU failed: " + lu_.lastErrorMessage());
    n_ = m.rows();
  }
  Vector solve(const Vector& rhs) const override {
    Vector x = lu_.solve(rhs);
    return x;
  }
  std::size_t bytes() const override {
    const auto nnz = static_cast<std::size_t>(lu_.nnzL() + lu_.nnzU());
    return nnz * (sizeof(double) + sizeof(int)) + 3 * static_cast<std::size_t>(n_) * sizeof(int);
  }

 private:
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  Index n_ = 0;
};

IterationReport from_gmres(const GmresResult& g, Method method) {
  IterationReport r;
  r.method = std::string(to_string(method));
  r.residual_history = g.history;
  r.iterations = g.iterations;
  r.converged = g.converged;
  r.stagnated = g.stagnated;
  r.final_residual = g.final_residual;
  return r;
}

GmresOptions outer_options(const SolverConfig& config, bool flexible) {
  return {config.eps, config.restart, config.maxit, flexible};
}

}  // namespace

Method parse_method(std::string_view name) {
  for (Method m : kAllMethods)
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected direct_se, se_block, se_ilut, revschur_ilut or revschur_svdse)");
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::direct_se: return "direct_se";
    case Method::se_block: return "se_block";
    case Method::se_ilut: return "se_ilut";
    case Method::revschur_ilut: return "revschur_ilut";
    case Method::revschur_svdse: return "revschur_svdse";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(delta_ilut >= 0.0 && delta_ilut < 1.0, "delta_ilut must lie in [0, 1)");
  require(delta_svd > 0.0 && delta_svd < 1.0, "delta_svd must lie in (0, 1)");
  require(pivot_tol >= 0.0 && pivot_tol <= 1.0, "pivot_tol must lie in [0, 1]");
  require(k_schur >= 1, "k_schur must be at least 1");
  require(restart >= 1, "restart must be at least 1");
  require(maxit >= 1, "maxit must be at least 1");
  require(direct_cap >= 1, "direct_cap must be positive");
}

std::unique_ptr<DirectSolver> make_direct_solver() { return std::make_unique<EigenSparseLu>(); }

BlockPreconditioner::BlockPreconditioner(const SEForm& se, const IlutOptions& options)
    : span_(se.coupling_square()) {
  const SparseMatrix s = se.matrix().block(span_.begin, span_.begin, span_.size, span_.size);
  factors_ = IlutFactors::factorize(s, options);
}

void BlockPreconditioner::apply(const Vector& in, Vector& out) const {
  out = in;
  if (span_.size == 0) return;
  Vector part;
  factors_.solve(in.segment(span_.begin, span_.size), part);
  out.segment(span_.begin, span_.size) = part;
}

LinearOperator BlockPreconditioner::as_operator(Index size) const {
  return {size, [this](const Vector& in, Vector& out) { apply(in, out); }};
}

SolveResult solve_direct_se(const SEForm& se, const Vector& y, const SolverConfig& config) {
  require(y.size() == se.n(), "solve: right-hand side length must equal N");
  if (se.size() > config.direct_cap)
    throw InfeasibleError("direct_se: N_H = " + std::to_string(se.size()) + " exceeds the direct-solve cap " +
                          std::to_string(config.direct_cap));
  SolveResult out;
  IterationReport& r = out.report;
  r.method = "direct_se";
  r.extended_size = se.size();
  const auto t0 = Clock::now();
  auto solver = make_direct_solver();
  solver->factorize(se.matrix());
  r.setup_seconds = seconds_since(t0);
  r.peak_extra_bytes = solver->bytes();

  const auto t1 = Clock::now();
  const Vector b = se.extend_rhs(y);
  const Vector z = solver->solve(b);
  r.solve_seconds = seconds_since(t1);
  out.x = se.extract_solution(z);
  const double bnorm = b.norm();
  r.final_residual = bnorm > 0.0 ? (b - se.matvec(z)).norm() / bnorm : 0.0;
  r.residual_history = {r.final_residual};
  r.converged = true;
  return out;
}

SolveResult solve_method2(const SEForm& se, const Vector& y, const SolverConfig& config) {
  require(config.method == Method::se_block || config.method == Method::se_ilut,
          "solve_method2: method must be se_block or se_ilut");
  require(y.size() == se.n(), "solve: right-hand side length must equal N");
  const auto t0 = Clock::now();
  std::unique_ptr<BlockPreconditioner> block;
  std::unique_ptr<IlutFactors> full;
  LinearOperator prec;
  if (config.method == Method::se_block) {
    block = std::make_unique<BlockPreconditioner>(se, config.ilut());
    prec = block->as_operator(se.size());
  } else {
    full = std::make_unique<IlutFactors>(IlutFactors::factorize(se.matrix(), config.ilut(), se.diagonal_row_order()));
    prec = full->as_operator();
  }
  const double setup = seconds_since(t0);

  const auto t1 = Clock::now();
  const GmresResult g = gmres(se.as_operator(), se.extend_rhs(y), outer_options(config, false), &prec);
  SolveResult out;
  out.report = from_gmres(g, config.method);
  out.report.solve_seconds = seconds_since(t1);
  out.report.setup_seconds = setup;
  out.report.extended_size = se.size();
  out.report.peak_extra_bytes = block ? block->bytes() : full->bytes();
  out.report.zero_pivots = block ? block->factors().zero_pivots() : full->zero_pivots();
  out.x = se.extract_solution(g.x);
  return out;
}

SolveResult solve_method3(const H2Matrix& a, const Vector& y, const SolverConfig& config) {
  require(config.method == Method::revschur_ilut || config.method == Method::revschur_svdse,
          "solve_method3: method must be revschur_ilut or revschur_svdse");
  require(y.size() == a.rows(), "solve: right-hand side length must equal N");
  const auto t0 = Clock::now();
  std::unique_ptr<H2Matrix> compressed;
  if (config.method == Method::revschur_svdse) compressed = std::make_unique<H2Matrix>(recompress(a, config.delta_svd));
  const SEForm se = assemble_se(compressed ? *compressed : a);
  const IlutFactors ilut = IlutFactors::factorize(se.matrix(), config.ilut(), se.diagonal_row_order());
  const double setup = seconds_since(t0);

  const LinearOperator inner_prec = ilut.as_operator();
  const LinearOperator h = se.as_operator();
  const GmresOptions inner{0.0, config.k_schur, config.k_schur, false};
  Index inner_iterations = 0;
  const LinearOperator prec{a.rows(), [&](const Vector& r, Vector& z) {
                              const GmresResult g = gmres(h, se.extend_rhs(r), inner, &inner_prec);
                              inner_iterations += g.iterations;
                              z = se.extract_solution(g.x);
                            }};

  const auto t1 = Clock::now();
  const GmresResult g = gmres(a.as_operator(), y, outer_options(config, true), &prec);
  SolveResult out;
  out.report = from_gmres(g, config.method);
  out.report.solve_seconds = seconds_since(t1);
  out.report.setup_seconds = setup;
  out.report.extended_size = se.size();
  out.report.peak_extra_bytes = se.matrix().bytes() + ilut.bytes();
  out.report.zero_pivots = ilut.zero_pivots();
  out.report.inner_iterations = inner_iterations;
  out.x = g.x;
  return out;
}

SolveResult solve(const H2Matrix& a, const Vector& y, const SolverConfig& config) {
  config.validate();
  require(a.rows() == a.cols(), "solve: the H2 matrix must be square");
  require(y.size() == a.rows(), "solve: right-hand side length must equal N");
  SolveResult out;
  if (config.method == Method::revschur_ilut || config.method == Method::revschur_svdse) {
    out = solve_method3(a, y, config);
  } else {
    const auto t0 = Clock::now();
    const SEForm se = assemble_se(a);
    const double assembly = seconds_since(t0);
    out = config.method == Method::direct_se ? solve_direct_se(se, y, config) : solve_method2(se, y, config);
    out.report.assembly_seconds = assembly;
  }
  const double ynorm = y.norm();
  out.report.residual_original = ynorm > 0.0 ? (y - a.matvec(out.x)).norm() / ynorm : out.x.norm();
  return out;
}

}  // namespace h2se
