#include "h2se/h2matrix.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

namespace h2se {

namespace {

constexpr std::array<char, 8> kMagic{'H', '2', 'S', 'E', 'M', 'A', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void i64(std::int64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void matrix(const Matrix& m) {
    i64(m.rows());
    i64(m.cols());
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  void raw(const void* data, std::size_t bytes) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
  std::int64_t i64() { std::int64_t v; raw(&v, sizeof v); return v; }
  double f64() { double v; raw(&v, sizeof v); return v; }
  Index count(std::int64_t limit) {
    const std::int64_t v = i64();
    if (v < 0 || v > limit) throw std::invalid_argument("h2 file: count out of range");
    return static_cast<Index>(v);
  }
  Matrix matrix() {
    const Index rows = count(kMaxDim);
    const Index cols = count(kMaxDim);
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) m(r, c) = f64();
    return m;
  }
  void raw(void* data, std::size_t bytes) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (!in_) throw std::invalid_argument("h2 file: truncated");
  }

  static constexpr std::int64_t kMaxDim = std::int64_t{1} << 32;

 private:
  std::istream& in_;
};

void write_tree(Writer& w, const ClusterTree& tree) {
  w.i64(tree.size());
  w.i64(tree.leaf_size());
  w.i64(tree.node_count());
  for (const ClusterNode& n : tree.nodes()) {
    w.i64(n.begin);
    w.i64(n.end);
    w.i64(n.parent);
    w.i64(n.children[0]);
    w.i64(n.children[1]);
    w.i64(n.level);
    for (int a = 0; a < 3; ++a) w.f64(n.bbox.lo[a]);
    for (int a = 0; a < 3; ++a) w.f64(n.bbox.hi[a]);
  }
  for (Index p : tree.permutation()) w.i64(p);
}

ClusterTree read_tree(Reader& r) {
  const Index n = r.count(Reader::kMaxDim);
  const Index leaf_size = r.count(Reader::kMaxDim);
  const Index node_count = r.count(4 * n + 1);
  std::vector<ClusterNode> nodes(static_cast<std::size_t>(node_count));
  for (ClusterNode& node : nodes) {
    node.begin = static_cast<Index>(r.i64());
    node.end = static_cast<Index>(r.i64());
    node.parent = static_cast<int>(r.i64());
    node.children[0] = static_cast<int>(r.i64());
    node.children[1] = static_cast<int>(r.i64());
    node.level = static_cast<int>(r.i64());
    for (int a = 0; a < 3; ++a) node.bbox.lo[a] = r.f64();
    for (int a = 0; a < 3; ++a) node.bbox.hi[a] = r.f64();
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index& p : perm) p = static_cast<Index>(r.i64());
  return ClusterTree(std::move(nodes), std::move(perm), leaf_size);
}

void write_pairs(Writer& w, const std::vector<BlockPair>& pairs) {
  w.i64(static_cast<std::int64_t>(pairs.size()));
  for (const BlockPair& p : pairs) {
    w.i64(p.row);
    w.i64(p.col);
  }
}

std::vector<BlockPair> read_pairs(Reader& r) {
  std::vector<BlockPair> pairs(static_cast<std::size_t>(r.count(Reader::kMaxDim)));
  for (BlockPair& p : pairs) {
    p.row = static_cast<int>(r.i64());
    p.col = static_cast<int>(r.i64());
  }
  return pairs;
}

void write_basis(Writer& w, const ClusterBasis& basis, const ClusterTree& tree) {
  for (Index k : basis.ranks) w.i64(k);
  for (int id = 0; id < tree.node_count(); ++id)
    if (tree.node(id).is_leaf()) w.matrix(basis.leaf[static_cast<std::size_t>(id)]);
  for (int id = 1; id < tree.node_count(); ++id) w.matrix(basis.transfer[static_cast<std::size_t>(id)]);
}

ClusterBasis read_basis(Reader& r, const ClusterTree& tree) {
  const auto count = static_cast<std::size_t>(tree.node_count());
  ClusterBasis basis;
  basis.ranks.resize(count);
  for (Index& k : basis.ranks) k = static_cast<Index>(r.i64());
  basis.leaf.assign(count, Matrix());
  basis.transfer.assign(count, Matrix());
  for (int id = 0; id < tree.node_count(); ++id)
    if (tree.node(id).is_leaf()) basis.leaf[static_cast<std::size_t>(id)] = r.matrix();
  for (int id = 1; id < tree.node_count(); ++id) basis.transfer[static_cast<std::size_t>(id)] = r.matrix();
  return basis;
}

}  // namespace

void save_h2(const H2Matrix& a, std::ostream& out) {
  Writer w(out);
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kVersion);
  w.u32(a.shares_tree() ? 1u : 0u);
  write_tree(w, a.row_tree());
  if (!a.shares_tree()) write_tree(w, a.col_tree());
  w.f64(a.partition().eta);
  write_pairs(w, a.partition().far);
  write_pairs(w, a.partition().close);
  write_basis(w, a.row_basis(), a.row_tree());
  write_basis(w, a.col_basis(), a.col_tree());
  for (std::size_t p = 0; p < a.partition().far.size(); ++p) w.matrix(a.coupling(p));
  for (std::size_t p = 0; p < a.partition().close.size(); ++p) w.matrix(a.close_block(p));
  if (!out) throw std::runtime_error("h2 file: write failed");
}

H2Matrix load_h2(std::istream& in) {
  Reader r(in);
  std::array<char, 8> magic{};
  r.raw(magic.data(), magic.size());
  if (magic != kMagic) throw std::invalid_argument("h2 file: bad magic");
  const std::uint32_t version = r.u32();
  if (version != kVersion)
    throw std::invalid_argument("h2 file: unsupported version " + std::to_string(version));
  const bool shared = r.u32() != 0;
  auto row_tree = std::make_shared<const ClusterTree>(read_tree(r));
  auto col_tree = shared ? row_tree : std::make_shared<const ClusterTree>(read_tree(r));
  BlockPartition partition;
  partition.eta = r.f64();
  partition.far = read_pairs(r);
  partition.close = read_pairs(r);
  for (const auto* list : {&partition.far, &partition.close})
    for (const BlockPair& p : *list)
      require(p.row >= 0 && p.row < row_tree->node_count() && p.col >= 0 &&
                  p.col < col_tree->node_count(),
              "h2 file: block pair references a missing node");
  ClusterBasis row_basis = read_basis(r, *row_tree);
  ClusterBasis col_basis = read_basis(r, *col_tree);
  std::vector<Matrix> coupling(partition.far.size());
  for (Matrix& m : coupling) m = r.matrix();
  std::vector<Matrix> close(partition.close.size());
  for (Matrix& m : close) m = r.matrix();
  return H2Matrix(std::move(row_tree), std::move(col_tree), std::move(partition),
                  std::move(row_basis), std::move(col_basis), std::move(coupling),
                  std::move(close));
}

}  // namespace h2se
