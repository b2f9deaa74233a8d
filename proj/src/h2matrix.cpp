#include "h2se/h2matrix.hpp"

#include <string>

namespace h2se {

std::vector<Matrix> ClusterBasis::expand(const ClusterTree& tree) const {
  std::vector<Matrix> out(static_cast<std::size_t>(tree.node_count()));
  for (int id = tree.node_count() - 1; id >= 0; --id) {
    const ClusterNode& node = tree.node(id);
    const auto slot = static_cast<std::size_t>(id);
    if (node.is_leaf()) {
      out[slot] = leaf[slot];
      continue;
    }
    out[slot].resize(node.size(), ranks[slot]);
    for (int child : node.children) {
      const ClusterNode& c = tree.node(child);
      const auto cs = static_cast<std::size_t>(child);
      out[slot].middleRows(c.begin - node.begin, c.size()) = out[cs] * transfer[cs];
    }
  }
  return out;
}

std::size_t ClusterBasis::stored_doubles() const {
  std::size_t total = 0;
  for (const Matrix& m : leaf) total += static_cast<std::size_t>(m.size());
  for (const Matrix& m : transfer) total += static_cast<std::size_t>(m.size());
  return total;
}

H2Matrix::H2Matrix(std::shared_ptr<const ClusterTree> row_tree,
                   std::shared_ptr<const ClusterTree> col_tree, BlockPartition partition,
                   ClusterBasis row_basis, ClusterBasis col_basis, std::vector<Matrix> coupling,
                   std::vector<Matrix> close)
    : row_tree_(std::move(row_tree)),
      col_tree_(std::move(col_tree)),
      partition_(std::move(partition)),
      row_basis_(std::move(row_basis)),
      col_basis_(std::move(col_basis)),
      coupling_(std::move(coupling)),
      close_(std::move(close)) {
  validate();
}

namespace {

void validate_basis(const ClusterBasis& basis, const ClusterTree& tree, const char* side) {
  const auto count = static_cast<std::size_t>(tree.node_count());
  const std::string where = std::string("h2 ") + side + " basis: ";
  require(basis.ranks.size() == count && basis.leaf.size() == count &&
              basis.transfer.size() == count,
          where + "one entry per node required");
  for (int id = 0; id < tree.node_count(); ++id) {
    const ClusterNode& node = tree.node(id);
    const auto slot = static_cast<std::size_t>(id);
    const Index rank = basis.ranks[slot];
    require(rank >= 0 && rank <= node.size(), where + "rank out of range");
    if (node.is_leaf())
      require(basis.leaf[slot].rows() == node.size() && basis.leaf[slot].cols() == rank,
              where + "leaf block has wrong shape");
    if (node.parent >= 0)
      require(basis.transfer[slot].rows() == rank &&
                  basis.transfer[slot].cols() == basis.ranks[static_cast<std::size_t>(node.parent)],
              where + "transfer block has wrong shape");
  }
}

}  // namespace

void H2Matrix::validate() const {
  require(row_tree_ && col_tree_, "h2: missing cluster tree");
  validate_basis(row_basis_, *row_tree_, "row");
  validate_basis(col_basis_, *col_tree_, "column");
  require(coupling_.size() == partition_.far.size(), "h2: one coupling block per far pair");
  require(close_.size() == partition_.close.size(), "h2: one dense block per close pair");
  for (std::size_t p = 0; p < partition_.far.size(); ++p) {
    const auto [r, c] = partition_.far[p];
    require(coupling_[p].rows() == row_basis_.rank(r) && coupling_[p].cols() == col_basis_.rank(c),
            "h2: coupling block has wrong shape");
  }
  for (std::size_t p = 0; p < partition_.close.size(); ++p) {
    const auto [r, c] = partition_.close[p];
    require(close_[p].rows() == row_tree_->node(r).size() &&
                close_[p].cols() == col_tree_->node(c).size(),
            "h2: close block has wrong shape");
  }
}

MatvecTrace H2Matrix::matvec_traced(const Vector& x) const {
  require(x.size() == cols(), "h2 matvec: length of x must equal the column count");
  const ClusterTree& rt = *row_tree_;
  const ClusterTree& ct = *col_tree_;
  const Vector xp = ct.to_tree_order(x);

  MatvecTrace trace;
  trace.xhat.resize(static_cast<std::size_t>(ct.node_count()));
  trace.yhat.resize(static_cast<std::size_t>(rt.node_count()));
  for (int id = 0; id < ct.node_count(); ++id)
    trace.xhat[static_cast<std::size_t>(id)] = Vector::Zero(col_basis_.rank(id));
  for (int id = 0; id < rt.node_count(); ++id)
    trace.yhat[static_cast<std::size_t>(id)] = Vector::Zero(row_basis_.rank(id));

  // Step 1: leaf projections.
  for (int id = 0; id < ct.node_count(); ++id) {
    const ClusterNode& node = ct.node(id);
    if (node.is_leaf())
      trace.xhat[static_cast<std::size_t>(id)].noalias() =
          col_basis_.leaf[static_cast<std::size_t>(id)].transpose() * xp.segment(node.begin, node.size());
  }
  // Step 2: forward transform; sons carry larger ids than their father.
  for (int id = ct.node_count() - 1; id > 0; --id) {
    const auto parent = static_cast<std::size_t>(ct.node(id).parent);
    trace.xhat[parent].noalias() +=
        col_basis_.transfer[static_cast<std::size_t>(id)].transpose() * trace.xhat[static_cast<std::size_t>(id)];
  }
  // Step 3: coupling, accumulated in the fixed far-pair order.
  for (std::size_t p = 0; p < partition_.far.size(); ++p) {
    const auto [r, c] = partition_.far[p];
    trace.yhat[static_cast<std::size_t>(r)].noalias() += coupling_[p] * trace.xhat[static_cast<std::size_t>(c)];
  }
  // Step 4: backward transform.
  for (int id = 1; id < rt.node_count(); ++id) {
    const auto parent = static_cast<std::size_t>(rt.node(id).parent);
    trace.yhat[static_cast<std::size_t>(id)].noalias() +=
        row_basis_.transfer[static_cast<std::size_t>(id)] * trace.yhat[parent];
  }
  // Step 5: leaf expansions plus the close field.
  Vector yp = Vector::Zero(rt.size());
  for (int id = 0; id < rt.node_count(); ++id) {
    const ClusterNode& node = rt.node(id);
    if (node.is_leaf())
      yp.segment(node.begin, node.size()).noalias() +=
          row_basis_.leaf[static_cast<std::size_t>(id)] * trace.yhat[static_cast<std::size_t>(id)];
  }
  for (std::size_t p = 0; p < partition_.close.size(); ++p) {
    const ClusterNode& rn = rt.node(partition_.close[p].row);
    const ClusterNode& cn = ct.node(partition_.close[p].col);
    yp.segment(rn.begin, rn.size()).noalias() += close_[p] * xp.segment(cn.begin, cn.size());
  }
  trace.y = rt.from_tree_order(yp);
  return trace;
}

Vector H2Matrix::matvec(const Vector& x) const { return matvec_traced(x).y; }

Vector H2Matrix::matvec_transpose(const Vector& y) const {
  require(y.size() == rows(), "h2 matvec_transpose: length of y must equal the row count");
  const ClusterTree& rt = *row_tree_;
  const ClusterTree& ct = *col_tree_;
  const Vector yp = rt.to_tree_order(y);

  std::vector<Vector> up(static_cast<std::size_t>(rt.node_count()));
  std::vector<Vector> down(static_cast<std::size_t>(ct.node_count()));
  for (int id = 0; id < rt.node_count(); ++id) {
    const ClusterNode& node = rt.node(id);
    const auto slot = static_cast<std::size_t>(id);
    up[slot] = node.is_leaf() ? Vector(row_basis_.leaf[slot].transpose() * yp.segment(node.begin, node.size()))
                              : Vector::Zero(row_basis_.rank(id));
  }
  for (int id = rt.node_count() - 1; id > 0; --id)
    up[static_cast<std::size_t>(rt.node(id).parent)].noalias() +=
        row_basis_.transfer[static_cast<std::size_t>(id)].transpose() * up[static_cast<std::size_t>(id)];

  for (int id = 0; id < ct.node_count(); ++id)
    down[static_cast<std::size_t>(id)] = Vector::Zero(col_basis_.rank(id));
  for (std::size_t p = 0; p < partition_.far.size(); ++p) {
    const auto [r, c] = partition_.far[p];
    down[static_cast<std::size_t>(c)].noalias() += coupling_[p].transpose() * up[static_cast<std::size_t>(r)];
  }
  for (int id = 1; id < ct.node_count(); ++id)
    down[static_cast<std::size_t>(id)].noalias() +=
        col_basis_.transfer[static_cast<std::size_t>(id)] * down[static_cast<std::size_t>(ct.node(id).parent)];

  Vector xp = Vector::Zero(ct.size());
  for (int id = 0; id < ct.node_count(); ++id) {
    const ClusterNode& node = ct.node(id);
    if (node.is_leaf())
      xp.segment(node.begin, node.size()).noalias() +=
          col_basis_.leaf[static_cast<std::size_t>(id)] * down[static_cast<std::size_t>(id)];
  }
  for (std::size_t p = 0; p < partition_.close.size(); ++p) {
    const ClusterNode& rn = rt.node(partition_.close[p].row);
    const ClusterNode& cn = ct.node(partition_.close[p].col);
    xp.segment(cn.begin, cn.size()).noalias() += close_[p].transpose() * yp.segment(rn.begin, rn.size());
  }
  return ct.from_tree_order(xp);
}

LinearOperator H2Matrix::as_operator() const {
  require(rows() == cols(), "h2: operator view needs a square matrix");
  return {rows(), [this](const Vector& in, Vector& out) { out = matvec(in); }};
}

Matrix H2Matrix::reconstruct() const {
  const ClusterTree& rt = *row_tree_;
  const ClusterTree& ct = *col_tree_;
  const auto u = row_basis_.expand(rt);
  const auto v = col_basis_.expand(ct);
  Matrix tree_order = Matrix::Zero(rows(), cols());
  for (std::size_t p = 0; p < partition_.far.size(); ++p) {
    const auto [r, c] = partition_.far[p];
    const ClusterNode& rn = rt.node(r);
    const ClusterNode& cn = ct.node(c);
    tree_order.block(rn.begin, cn.begin, rn.size(), cn.size()) =
        u[static_cast<std::size_t>(r)] * coupling_[p] * v[static_cast<std::size_t>(c)].transpose();
  }
  for (std::size_t p = 0; p < partition_.close.size(); ++p) {
    const ClusterNode& rn = rt.node(partition_.close[p].row);
    const ClusterNode& cn = ct.node(partition_.close[p].col);
    tree_order.block(rn.begin, cn.begin, rn.size(), cn.size()) = close_[p];
  }
  Matrix out(rows(), cols());
  const auto rp = rt.permutation();
  const auto cp = ct.permutation();
  for (Index b = 0; b < cols(); ++b)
    for (Index a = 0; a < rows(); ++a) out(rp[static_cast<std::size_t>(a)], cp[static_cast<std::size_t>(b)]) = tree_order(a, b);
  return out;
}

H2Storage H2Matrix::storage() const {
  H2Storage s;
  s.basis_doubles = row_basis_.stored_doubles() + col_basis_.stored_doubles();
  for (const Matrix& m : coupling_) s.coupling_doubles += static_cast<std::size_t>(m.size());
  for (const Matrix& m : close_) s.close_doubles += static_cast<std::size_t>(m.size());
  return s;
}

}  // namespace h2se
