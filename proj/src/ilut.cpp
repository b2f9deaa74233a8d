#include "h2se/ilut.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace h2se {

namespace {

struct Entry {
  Index index;
  double value;
};

void keep_largest(std::vector<Entry>& entries, std::size_t cap) {
  if (entries.size() <= cap) return;
  std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(cap), entries.end(),
                   [](const Entry& a, const Entry& b) { return std::abs(a.value) > std::abs(b.value); });
  entries.resize(cap);
}

}  // namespace

IlutFactors IlutFactors::factorize(const SparseMatrix& m, const IlutOptions& options,
                                   std::span<const Index> row_order) {
  require(m.rows() == m.cols(), "ilut: matrix must be square");
  require(options.drop_tol >= 0.0, "ilut: drop tolerance must be non-negative");
  const Index n = m.rows();
  const auto un = static_cast<std::size_t>(n);

  IlutFactors f;
  f.n_ = n;
  f.perm_.resize(un);
  std::iota(f.perm_.begin(), f.perm_.end(), Index{0});
  if (row_order.empty()) {
    f.rows_ = f.perm_;
  } else {
    require(row_order.size() == un, "ilut: row order must list every row once");
    f.rows_.assign(row_order.begin(), row_order.end());
    std::vector<char> seen(un, 0);
    for (Index r : f.rows_) {
      require(r >= 0 && r < n && !seen[static_cast<std::size_t>(r)], "ilut: row order must be a permutation");
      seen[static_cast<std::size_t>(r)] = 1;
    }
  }
  std::vector<Index> iperm = f.perm_;

  std::vector<double> w(un, 0.0);
  std::vector<Index> stamp(un, -1);
  std::vector<Index> touched;
  std::vector<Index> heap;
  std::vector<Entry> lower, upper;
  const auto unbounded = std::numeric_limits<std::size_t>::max();

  for (Index i = 0; i < n; ++i) {
    touched.clear();
    heap.clear();
    lower.clear();
    upper.clear();

    const Index source = f.rows_[static_cast<std::size_t>(i)];
    const auto idx = m.row_indices(source);
    const auto val = m.row_values(source);
    double norm2 = 0.0;
    std::size_t original_lower = 0, original_upper = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Index c = idx[k];
      const auto uc = static_cast<std::size_t>(c);
      w[uc] = val[k];
      stamp[uc] = i;
      touched.push_back(c);
      norm2 += val[k] * val[k];
      if (iperm[uc] < i) {
        heap.push_back(iperm[uc]);
        ++original_lower;
      } else if (iperm[uc] > i) {
        ++original_upper;
      }
    }
    std::make_heap(heap.begin(), heap.end(), std::greater<>());
    const double norm = std::sqrt(norm2);
    const double tau = options.drop_tol * norm;

    // Eliminate with the already factored rows, smallest position first.
    while (!heap.empty()) {
      std::pop_heap(heap.begin(), heap.end(), std::greater<>());
      const Index k = heap.back();
      heap.pop_back();
      const auto ck = static_cast<std::size_t>(f.perm_[static_cast<std::size_t>(k)]);
      const double value = w[ck];
      w[ck] = 0.0;
      if (value == 0.0) continue;
      const auto urow = static_cast<std::size_t>(f.u_ptr_[static_cast<std::size_t>(k)]);
      const auto uend = static_cast<std::size_t>(f.u_ptr_[static_cast<std::size_t>(k) + 1]);
      const double mult = value / f.u_val_[urow];
      if (std::abs(mult) < tau) continue;
      lower.push_back({k, mult});
      for (std::size_t e = urow + 1; e < uend; ++e) {
        const Index c = f.u_idx_[e];
        const auto uc = static_cast<std::size_t>(c);
        if (stamp[uc] != i) {
          stamp[uc] = i;
          w[uc] = 0.0;
          touched.push_back(c);
          if (iperm[uc] < i) {
            heap.push_back(iperm[uc]);
            std::push_heap(heap.begin(), heap.end(), std::greater<>());
          }
        }
        w[uc] -= mult * f.u_val_[e];
      }
    }

    const Index diag_col = f.perm_[static_cast<std::size_t>(i)];
    double diag = stamp[static_cast<std::size_t>(diag_col)] == i ? w[static_cast<std::size_t>(diag_col)] : 0.0;
    for (Index c : touched) {
      const auto uc = static_cast<std::size_t>(c);
      if (iperm[uc] > i && w[uc] != 0.0 && std::abs(w[uc]) >= tau) upper.push_back({c, w[uc]});
      w[uc] = 0.0;
    }
    if (options.fill_max >= 0) {
      const auto fill = static_cast<std::size_t>(options.fill_max);
      keep_largest(lower, original_lower + fill);
      keep_largest(upper, original_upper + fill);
    } else {
      keep_largest(lower, unbounded);
    }
    std::sort(lower.begin(), lower.end(), [](const Entry& a, const Entry& b) { return a.index < b.index; });

    if (options.pivot_tol > 0.0 && !upper.empty()) {
      auto best = std::max_element(upper.begin(), upper.end(), [](const Entry& a, const Entry& b) {
        return std::abs(a.value) < std::abs(b.value);
      });
      if (std::abs(diag) < options.pivot_tol * std::abs(best->value)) {
        const Index new_col = best->index;
        const double new_diag = best->value;
        if (diag != 0.0) {
          *best = {diag_col, diag};
        } else {
          upper.erase(best);
        }
        diag = new_diag;
        const Index j = iperm[static_cast<std::size_t>(new_col)];
        std::swap(f.perm_[static_cast<std::size_t>(i)], f.perm_[static_cast<std::size_t>(j)]);
        iperm[static_cast<std::size_t>(f.perm_[static_cast<std::size_t>(i)])] = i;
        iperm[static_cast<std::size_t>(f.perm_[static_cast<std::size_t>(j)])] = j;
        ++f.swaps_;
      }
    }
    if (diag == 0.0) {
      ++f.zero_pivots_;
      diag = tau > 0.0 ? tau : (norm > 0.0 ? std::sqrt(std::numeric_limits<double>::epsilon()) * norm : 1.0);
    }

    for (const Entry& e : lower) {
      f.l_idx_.push_back(e.index);
      f.l_val_.push_back(e.value);
    }
    f.l_ptr_.push_back(static_cast<Index>(f.l_idx_.size()));
    f.u_idx_.push_back(f.perm_[static_cast<std::size_t>(i)]);
    f.u_val_.push_back(diag);
    for (const Entry& e : upper) {
      f.u_idx_.push_back(e.index);
      f.u_val_.push_back(e.value);
    }
    f.u_ptr_.push_back(static_cast<Index>(f.u_idx_.size()));
  }
  // Positions are final now; store U against them.
  for (Index& c : f.u_idx_) c = iperm[static_cast<std::size_t>(c)];
  return f;
}

void IlutFactors::solve(const Vector& rhs, Vector& out) const {
  require(rhs.size() == n_, "ilut solve: length mismatch");
  Vector y(n_);
  for (Index i = 0; i < n_; ++i) {
    double s = rhs[rows_[static_cast<std::size_t>(i)]];
    for (Index e = l_ptr_[static_cast<std::size_t>(i)]; e < l_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
      s -= l_val_[static_cast<std::size_t>(e)] * y[l_idx_[static_cast<std::size_t>(e)]];
    y[i] = s;
  }
  for (Index i = n_ - 1; i >= 0; --i) {
    const auto b = static_cast<std::size_t>(u_ptr_[static_cast<std::size_t>(i)]);
    const auto e = static_cast<std::size_t>(u_ptr_[static_cast<std::size_t>(i) + 1]);
    double s = y[i];
    for (std::size_t k = b + 1; k < e; ++k) s -= u_val_[k] * y[u_idx_[k]];
    y[i] = s / u_val_[b];
  }
  out.resize(n_);
  for (Index pos = 0; pos < n_; ++pos) out[perm_[static_cast<std::size_t>(pos)]] = y[pos];
}

Vector IlutFactors::solve(const Vector& rhs) const {
  Vector out;
  solve(rhs, out);
  return out;
}

LinearOperator IlutFactors::as_operator() const {
  return {n_, [this](const Vector& in, Vector& out) { solve(in, out); }};
}

SparseMatrix IlutFactors::lower() const {
  std::vector<Triplet> t;
  for (Index i = 0; i < n_; ++i)
    for (Index e = l_ptr_[static_cast<std::size_t>(i)]; e < l_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
      t.push_back({i, l_idx_[static_cast<std::size_t>(e)], l_val_[static_cast<std::size_t>(e)]});
  return SparseMatrix::from_triplets(n_, n_, std::move(t));
}

SparseMatrix IlutFactors::upper() const {
  std::vector<Triplet> t;
  for (Index i = 0; i < n_; ++i)
    for (Index e = u_ptr_[static_cast<std::size_t>(i)]; e < u_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
      t.push_back({i, u_idx_[static_cast<std::size_t>(e)], u_val_[static_cast<std::size_t>(e)]});
  return SparseMatrix::from_triplets(n_, n_, std::move(t));
}

std::size_t IlutFactors::bytes() const {
  return (l_ptr_.size() + u_ptr_.size() + l_idx_.size() + u_idx_.size() + perm_.size() + rows_.size()) *
             sizeof(Index) +
         (l_val_.size() + u_val_.size()) * sizeof(double);
}

}  // namespace h2se
