#pragma once

#include "h2se/common.hpp"
#include "h2se/h2matrix.hpp"
#include "h2se/ilut.hpp"
#include "h2se/krylov.hpp"
#include "h2se/seform.hpp"
#include "h2se/sparse.hpp"

#include <array>
#include <memory>
#include <string_view>

namespace h2se {

enum class Method { direct_se, se_block, se_ilut, revschur_ilut, revschur_svdse };

inline constexpr std::array<Method, 5> kAllMethods{Method::direct_se, Method::se_block, Method::se_ilut,
                                                   Method::revschur_ilut, Method::revschur_svdse};

Method parse_method(std::string_view name);
std::string_view to_string(Method method);

struct SolverConfig {
  Method method = Method::revschur_svdse;
  double eps = 1e-8;
  double delta_ilut = 1e-2;
  /// Extra entries per ILUT row beyond the original pattern; negative is unbounded.
  Index fill_max = 20;
  double pivot_tol = 0.1;
  double delta_svd = 1e-2;
  Index k_schur = 5;
  Index restart = 50;
  Index maxit = 500;
  /// Largest N_H the sparse direct solver accepts.
  Index direct_cap = 200000;

  void validate() const;
  IlutOptions ilut() const { return {delta_ilut, fill_max, pivot_tol}; }
};

/// Complete sparse factorization behind a small interface so another backend
/// can be slotted in.
class DirectSolver {
 public:
  virtual ~DirectSolver() = default;
  /// Throws std::runtime_error when the matrix is numerically singular.
  virtual void factorize(const SparseMatrix& m) = 0;
  virtual Vector solve(const Vector& rhs) const = 0;
  virtual std::size_t bytes() const = 0;
};

/// Supernodal LU with partial pivoting and COLAMD fill-reducing ordering.
std::unique_ptr<DirectSolver> make_direct_solver();

/// blockdiag(I, P(S), I) where P(S) is the ILUT of the principal square of H
/// that contains the coupling block.
class BlockPreconditioner {
 public:
  BlockPreconditioner(const SEForm& se, const IlutOptions& options);

  BlockSpan span() const { return span_; }
  const IlutFactors& factors() const { return factors_; }
  void apply(const Vector& in, Vector& out) const;
  LinearOperator as_operator(Index size) const;
  std::size_t bytes() const { return factors_.bytes(); }

 private:
  BlockSpan span_;
  IlutFactors factors_;
};

struct SolveResult {
  Vector x;
  IterationReport report;
};

/// Method 1: factorize H and extract.
SolveResult solve_direct_se(const SEForm& se, const Vector& y, const SolverConfig& config);
/// Method 2: GMRES on H preconditioned by se_block or se_ilut.
SolveResult solve_method2(const SEForm& se, const Vector& y, const SolverConfig& config);
/// Method 3: FGMRES on A, preconditioned by k_schur inner ILUT-GMRES steps on
/// SE(B), with B = A or B = recompress(A, delta_svd).
SolveResult solve_method3(const H2Matrix& a, const Vector& y, const SolverConfig& config);

/// Runs config.method end to end. Methods 1 and 2 assemble SE(A) first and
/// report that time as assembly_seconds. Fills residual_original.
SolveResult solve(const H2Matrix& a, const Vector& y, const SolverConfig& config);

}  // namespace h2se
