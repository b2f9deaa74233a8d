#include "h2se/krylov.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace h2se {

namespace {

void apply_givens(double c, double s, double& a, double& b) {
  const double t = c * a + s * b;
  b = -s * a + c * b;
  a = t;
}

}  // namespace

GmresResult gmres(const LinearOperator& op, const Vector& b, const GmresOptions& options,
                  const LinearOperator* preconditioner) {
  require(op.size == b.size(), "gmres: right-hand side length must match the operator");
  require(options.restart >= 1, "gmres: restart must be at least 1");
  require(options.maxit >= 0, "gmres: maxit must be non-negative");
  require(!preconditioner || preconditioner->size == op.size, "gmres: preconditioner size mismatch");

  const Index n = b.size();
  GmresResult result;
  result.x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    result.history = {0.0};
    result.converged = true;
    return result;
  }

  const Index m = std::min(options.restart, std::max<Index>(n, 1));
  Matrix v(n, m + 1);
  Matrix z(options.flexible ? n : 0, options.flexible ? m : 0);
  Matrix h = Matrix::Zero(m + 1, m);
  Vector cs(m), sn(m), g(m + 1);
  Vector r = b, w(n), t(n);

  double rnorm = bnorm;
  result.history.push_back(1.0);

  while (true) {
    if (rnorm <= options.eps * bnorm || result.iterations >= options.maxit) break;
    v.col(0) = r / rnorm;
    g.setZero();
    g[0] = rnorm;
    h.setZero();
    Index j = 0;
    for (; j < m && result.iterations < options.maxit; ++j) {
      if (preconditioner) {
        preconditioner->apply(v.col(j), t);
        if (options.flexible) z.col(j) = t;
        op.apply(t, w);
      } else {
        op.apply(v.col(j), w);
      }
      const double wnorm = w.norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (Index i = 0; i <= j; ++i) {
          const double d = v.col(i).dot(w);
          h(i, j) += d;
          w -= d * v.col(i);
        }
      }
      const double hn = w.norm();
      h(j + 1, j) = hn;
      for (Index i = 0; i < j; ++i) apply_givens(cs[i], sn[i], h(i, j), h(i + 1, j));
      const double a = h(j, j), c = h(j + 1, j);
      const double rho = std::hypot(a, c);
      cs[j] = rho > 0.0 ? a / rho : 1.0;
      sn[j] = rho > 0.0 ? c / rho : 0.0;
      h(j, j) = rho;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++result.iterations;
      result.history.push_back(std::abs(g[j + 1]) / bnorm);

      if (hn <= 1e-14 * wnorm) {
        ++j;
        break;
      }
      v.col(j + 1) = w / hn;
      if (std::abs(g[j + 1]) <= options.eps * bnorm) {
        ++j;
        break;
      }
    }

    // Solve the j x j triangular least-squares system and update x.
    Vector y = g.head(j);
    for (Index i = j - 1; i >= 0; --i) {
      for (Index k = i + 1; k < j; ++k) y[i] -= h(i, k) * y[k];
      y[i] = h(i, i) != 0.0 ? y[i] / h(i, i) : 0.0;
    }
    if (options.flexible) {
      result.x += z.leftCols(j) * y;
    } else if (preconditioner) {
      const Vector u = v.leftCols(j) * y;
      preconditioner->apply(u, t);
      result.x += t;
    } else {
      result.x += v.leftCols(j) * y;
    }

    const double previous = rnorm;
    op.apply(result.x, w);
    r = b - w;
    rnorm = r.norm();
    if (rnorm <= options.eps * bnorm || result.iterations >= options.maxit) break;
    if (rnorm >= previous * (1.0 - 1e-12)) {
      result.stagnated = true;
      break;
    }
  }

  result.final_residual = rnorm / bnorm;
  result.history.back() = result.final_residual;
  result.converged = rnorm <= options.eps * bnorm;
  return result;
}

void IterationReport::write_csv(std::ostream& out,
                                const std::vector<std::pair<std::string, std::string>>& extra) const {
  char buf[64];
  out << "iteration,relative_residual\n";
  for (std::size_t i = 0; i < residual_history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", residual_history[i]);
    out << i << ',' << buf << '\n';
  }
  out << '\n' << "key,value\n";
  auto num = [&](const char* key, double value) {
    std::snprintf(buf, sizeof buf, "%.9g", value);
    out << key << ',' << buf << '\n';
  };
  out << "method," << method << '\n';
  out << "iterations," << iterations << '\n';
  out << "converged," << (converged ? "true" : "false") << '\n';
  out << "stagnated," << (stagnated ? "true" : "false") << '\n';
  num("final_residual", final_residual);
  num("residual_original", residual_original);
  out << "extended_size," << extended_size << '\n';
  num("assembly_seconds", assembly_seconds);
  num("setup_seconds", setup_seconds);
  num("solve_seconds", solve_seconds);
  out << "preconditioner_bytes," << peak_extra_bytes << '\n';
  out << "zero_pivots," << zero_pivots << '\n';
  out << "inner_iterations," << inner_iterations << '\n';
  for (const auto& [key, value] : extra) out << key << ',' << value << '\n';
}

}  // namespace h2se
