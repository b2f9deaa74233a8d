#pragma once

#include "h2se/common.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace h2se {

struct GmresOptions {
  /// Stop once ||b - op x|| <= eps ||b||. Zero runs until maxit.
  double eps = 1e-8;
  Index restart = 50;
  Index maxit = 500;
  /// Keep the preconditioned directions so the preconditioner may change
  /// between iterations (FGMRES).
  bool flexible = false;
};

struct GmresResult {
  Vector x;
  /// Relative residual before the first step and after every step. Entries
  /// inside a restart cycle are the least-squares estimates; the last entry is
  /// the true residual of the returned x.
  std::vector<double> history;
  Index iterations = 0;
  bool converged = false;
  bool stagnated = false;
  double final_residual = 0.0;
};

/// Restarted GMRES with right preconditioning, x0 = 0.
GmresResult gmres(const LinearOperator& op, const Vector& b, const GmresOptions& options,
                  const LinearOperator* preconditioner = nullptr);

struct IterationReport {
  std::string method;
  std::vector<double> residual_history;
  Index iterations = 0;
  bool converged = false;
  bool stagnated = false;
  double final_residual = 0.0;
  /// ||A x - y|| / ||y|| on the original system, when available.
  double residual_original = -1.0;
  /// Size of the extended system the method worked with (0 when none).
  Index extended_size = 0;
  double assembly_seconds = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  std::size_t peak_extra_bytes = 0;
  Index zero_pivots = 0;
  Index inner_iterations = 0;

  double total_seconds() const { return setup_seconds + solve_seconds; }

  /// "iteration,relative_residual" rows, a blank line, then "key,value" rows
  /// for the scalars followed by `extra`.
  void write_csv(std::ostream& out,
                 const std::vector<std::pair<std::string, std::string>>& extra = {}) const;
};

}  // namespace h2se
