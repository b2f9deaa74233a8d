#include "h2se/seform.hpp"

#include <algorithm>
#include <ostream>

namespace h2se {

Index SELayout::yhat_row(int row_node) const {
  const Index col = yhat_offset.at(static_cast<std::size_t>(row_node));
  return col < 0 ? -1 : n + (col - yhat.begin);
}

Index SELayout::xhat_row(int col_node) const {
  const Index col = xhat_offset.at(static_cast<std::size_t>(col_node));
  return col < 0 ? -1 : n + yhat.size + (col - xhat.begin);
}

SEForm::SEForm(SparseMatrix h, SELayout layout, int row_depth, int col_depth)
    : h_(std::move(h)), layout_(std::move(layout)), row_depth_(row_depth), col_depth_(col_depth) {
  require(h_.rows() == h_.cols() && h_.rows() == layout_.size(), "se-form: H must be square of size N_H");
}

namespace {

/// Node ids grouped by level, ids ascending within a level.
std::vector<std::vector<int>> by_level(const ClusterTree& tree) {
  std::vector<std::vector<int>> levels(static_cast<std::size_t>(tree.depth()));
  for (int id = 0; id < tree.node_count(); ++id)
    levels[static_cast<std::size_t>(tree.node(id).level)].push_back(id);
  return levels;
}

}  // namespace

SEForm assemble_se(const H2Matrix& a) {
  require(a.rows() == a.cols(), "se-form: the H2 matrix must be square");
  const ClusterTree& rt = a.row_tree();
  const ClusterTree& ct = a.col_tree();
  const ClusterBasis& rb = a.row_basis();
  const ClusterBasis& cb = a.col_basis();
  const BlockPartition& part = a.partition();
  const Index n = a.rows();
  {
    std::vector<std::pair<int, int>> pairs;
    for (const BlockPair& p : part.far) pairs.emplace_back(p.row, p.col);
    std::sort(pairs.begin(), pairs.end());
    require(std::adjacent_find(pairs.begin(), pairs.end()) == pairs.end(), "se-form: duplicate far pair");
  }

  SELayout lay;
  lay.n = n;
  lay.x = {0, n};
  lay.xhat_offset.assign(static_cast<std::size_t>(ct.node_count()), -1);
  lay.yhat_offset.assign(static_cast<std::size_t>(rt.node_count()), -1);

  Index at = n;
  auto place_x = [&](int id) {
    if (cb.rank(id) == 0) return;
    lay.xhat_offset[static_cast<std::size_t>(id)] = at;
    lay.xhat_nodes.push_back(id);
    at += cb.rank(id);
  };
  auto place_y = [&](int id) {
    if (rb.rank(id) == 0) return;
    lay.yhat_offset[static_cast<std::size_t>(id)] = at;
    lay.yhat_nodes.push_back(id);
    at += rb.rank(id);
  };

  lay.xhat_leaves.begin = at;
  for (int id : ct.leaves()) place_x(id);
  lay.xhat_leaves.size = at - lay.xhat_leaves.begin;
  lay.xhat_inner.begin = at;
  const auto col_levels = by_level(ct);
  for (auto level = col_levels.rbegin(); level != col_levels.rend(); ++level)
    for (int id : *level)
      if (!ct.node(id).is_leaf()) place_x(id);
  lay.xhat_inner.size = at - lay.xhat_inner.begin;
  lay.xhat = {lay.xhat_leaves.begin, at - lay.xhat_leaves.begin};

  lay.yhat_inner.begin = at;
  for (const auto& level : by_level(rt))
    for (int id : level)
      if (!rt.node(id).is_leaf()) place_y(id);
  lay.yhat_inner.size = at - lay.yhat_inner.begin;
  lay.yhat_leaves.begin = at;
  for (int id : rt.leaves()) place_y(id);
  lay.yhat_leaves.size = at - lay.yhat_leaves.begin;
  lay.yhat = {lay.yhat_inner.begin, at - lay.yhat_inner.begin};

  const auto rperm = rt.permutation();
  const auto cperm = ct.permutation();
  std::vector<Triplet> t;

  // y equations: C x + E yhat_leaves = y.
  for (std::size_t p = 0; p < part.close.size(); ++p) {
    const ClusterNode& rn = rt.node(part.close[p].row);
    const ClusterNode& cn = ct.node(part.close[p].col);
    const Matrix& block = a.close_block(p);
    for (Index i = 0; i < rn.size(); ++i)
      for (Index j = 0; j < cn.size(); ++j)
        t.push_back({rperm[static_cast<std::size_t>(rn.begin + i)], cperm[static_cast<std::size_t>(cn.begin + j)], block(i, j)});
  }
  for (int id : rt.leaves()) {
    const Index off = lay.yhat_offset[static_cast<std::size_t>(id)];
    if (off < 0) continue;
    const ClusterNode& node = rt.node(id);
    const Matrix& e = a.E(id);
    for (Index i = 0; i < e.rows(); ++i)
      for (Index k = 0; k < e.cols(); ++k)
        t.push_back({rperm[static_cast<std::size_t>(node.begin + i)], off + k, e(i, k)});
  }

  // yhat equations: S xhat + L yhat - yhat = 0.
  for (std::size_t p = 0; p < part.far.size(); ++p) {
    const auto [r, c] = part.far[p];
    const Index row0 = lay.yhat_row(r);
    const Index col0 = lay.xhat_offset[static_cast<std::size_t>(c)];
    if (row0 < 0 || col0 < 0) continue;
    const Matrix& s = a.coupling(p);
    for (Index i = 0; i < s.rows(); ++i)
      for (Index j = 0; j < s.cols(); ++j) t.push_back({row0 + i, col0 + j, s(i, j)});
  }
  for (int id : lay.yhat_nodes) {
    const Index row0 = lay.yhat_row(id);
    const int parent = rt.node(id).parent;
    const Index pcol = parent >= 0 ? lay.yhat_offset[static_cast<std::size_t>(parent)] : -1;
    if (pcol >= 0) {
      const Matrix& l = a.L(id);
      for (Index i = 0; i < l.rows(); ++i)
        for (Index j = 0; j < l.cols(); ++j) t.push_back({row0 + i, pcol + j, l(i, j)});
    }
    const Index own = lay.yhat_offset[static_cast<std::size_t>(id)];
    for (Index i = 0; i < rb.rank(id); ++i) t.push_back({row0 + i, own + i, -1.0});
  }

  // xhat equations: D x + R xhat - xhat = 0.
  for (int id : lay.xhat_nodes) {
    const Index row0 = lay.xhat_row(id);
    const ClusterNode& node = ct.node(id);
    if (node.is_leaf()) {
      const Matrix d = a.D(id);
      for (Index i = 0; i < d.rows(); ++i)
        for (Index j = 0; j < d.cols(); ++j)
          t.push_back({row0 + i, cperm[static_cast<std::size_t>(node.begin + j)], d(i, j)});
    } else {
      for (int child : node.children) {
        const Index ccol = lay.xhat_offset[static_cast<std::size_t>(child)];
        if (ccol < 0) continue;
        const Matrix r = a.R(child);
        for (Index i = 0; i < r.rows(); ++i)
          for (Index j = 0; j < r.cols(); ++j) t.push_back({row0 + i, ccol + j, r(i, j)});
      }
    }
    const Index own = lay.xhat_offset[static_cast<std::size_t>(id)];
    for (Index i = 0; i < cb.rank(id); ++i) t.push_back({row0 + i, own + i, -1.0});
  }

  const Index nh = lay.size();
  return SEForm(SparseMatrix::from_triplets(nh, nh, std::move(t)), std::move(lay), rt.depth(), ct.depth());
}

SparseMatrix SEForm::h0() const {
  std::vector<Triplet> shift;
  const BlockSpan yr = layout_.yhat_rows();
  const BlockSpan xr = layout_.xhat_rows();
  for (Index i = 0; i < yr.size; ++i) shift.push_back({yr.begin + i, layout_.yhat.begin + i, 1.0});
  for (Index i = 0; i < xr.size; ++i) shift.push_back({xr.begin + i, layout_.xhat.begin + i, 1.0});
  return h_ + SparseMatrix::from_triplets(size(), size(), std::move(shift));
}

bool SEForm::satisfies_size_bound() const {
  return size() < (2 * static_cast<Index>(depth()) + 1) * n();
}

BlockSpan SEForm::coupling_square() const {
  return {n(), std::max(layout_.xhat.size, layout_.yhat.size)};
}

std::vector<Index> SEForm::diagonal_row_order() const {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(size()));
  const BlockSpan groups[] = {layout_.y_rows(), layout_.xhat_rows(), layout_.yhat_rows()};
  for (const BlockSpan& g : groups)
    for (Index r = g.begin; r < g.end(); ++r) order.push_back(r);
  return order;
}

Vector SEForm::extend_rhs(const Vector& y) const {
  require(y.size() == n(), "se-form extend_rhs: length must equal N");
  Vector z = Vector::Zero(size());
  z.head(n()) = y;
  return z;
}

Vector SEForm::extract_solution(const Vector& z) const {
  require(z.size() == size(), "se-form extract_solution: length must equal N_H");
  return z.head(n());
}

Vector SEForm::matvec(const Vector& v) const {
  require(v.size() == size(), "se-form matvec: length must equal N_H");
  return h_ * v;
}

Vector SEForm::pack(const Vector& x, const MatvecTrace& trace) const {
  require(x.size() == n(), "se-form pack: length of x must equal N");
  Vector z(size());
  z.head(n()) = x;
  for (int id : layout_.xhat_nodes) {
    const Vector& c = trace.xhat[static_cast<std::size_t>(id)];
    z.segment(layout_.xhat_offset[static_cast<std::size_t>(id)], c.size()) = c;
  }
  for (int id : layout_.yhat_nodes) {
    const Vector& c = trace.yhat[static_cast<std::size_t>(id)];
    z.segment(layout_.yhat_offset[static_cast<std::size_t>(id)], c.size()) = c;
  }
  return z;
}

Vector SEForm::pack_equations(const MatvecTrace& trace) const {
  Vector rhs(size());
  rhs.head(n()) = trace.y;
  for (int id : layout_.yhat_nodes) {
    const Vector& c = trace.yhat[static_cast<std::size_t>(id)];
    rhs.segment(layout_.yhat_row(id), c.size()) = c;
  }
  for (int id : layout_.xhat_nodes) {
    const Vector& c = trace.xhat[static_cast<std::size_t>(id)];
    rhs.segment(layout_.xhat_row(id), c.size()) = c;
  }
  return rhs;
}

void SEForm::write_manifest(std::ostream& out) const {
  const SELayout& l = layout_;
  const Index bound = (2 * static_cast<Index>(depth()) + 1) * n();
  out << "N " << n() << '\n'
      << "N_H " << size() << '\n'
      << "nnz " << h_.nnz() << '\n'
      << "levels row " << row_depth_ << " col " << col_depth_ << " k " << depth() << '\n'
      << "size_bound (2k+1)N " << bound << ' ' << (satisfies_size_bound() ? "holds" : "VIOLATED") << '\n';
  auto span = [&](const char* name, BlockSpan s) {
    out << name << ' ' << s.begin << ' ' << s.end() << '\n';
  };
  span("unknowns.x", l.x);
  span("unknowns.xhat", l.xhat);
  span("unknowns.xhat.leaves", l.xhat_leaves);
  span("unknowns.xhat.inner", l.xhat_inner);
  span("unknowns.yhat", l.yhat);
  span("unknowns.yhat.inner", l.yhat_inner);
  span("unknowns.yhat.leaves", l.yhat_leaves);
  span("equations.y", l.y_rows());
  span("equations.yhat", l.yhat_rows());
  span("equations.xhat", l.xhat_rows());
  span("coupling_square", coupling_square());
  for (int id : l.xhat_nodes)
    out << "xhat.node " << id << ' ' << l.xhat_offset[static_cast<std::size_t>(id)] << ' '
        << l.xhat_row(id) << '\n';
  for (int id : l.yhat_nodes)
    out << "yhat.node " << id << ' ' << l.yhat_offset[static_cast<std::size_t>(id)] << ' '
        << l.yhat_row(id) << '\n';
}

}  // namespace h2se
