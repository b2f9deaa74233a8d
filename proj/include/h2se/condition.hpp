#pragma once

#include "h2se/common.hpp"
#include "h2se/sparse.hpp"

namespace h2se {

/// sigma_max / sigma_min of a dense matrix; infinity when singular.
double condition_exact(const Matrix& m);

/// Densifies the operator column by column (n applications) when n is within
/// dense_cap, then returns condition_exact. Larger operators are refused with
/// InfeasibleError since only their action is known.
double estimate_condition(const LinearOperator& op, Index dense_cap = 4000);

/// Exact mode up to dense_cap; beyond it, power iteration on M^T M for the
/// largest singular value and inverse iteration through a sparse LU for the
/// smallest.
double estimate_condition(const SparseMatrix& m, Index dense_cap = 4000, int iterations = 200);

}  // namespace h2se
