#include "h2se/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace h2se {

TriangleMesh TriangleMesh::from_parts(std::vector<Vec3> vertices,
                                      std::vector<std::array<Index, 3>> triangles) {
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const Index nv = static_cast<Index>(mesh.vertices.size());
  mesh.centroids.reserve(mesh.triangles.size());
  mesh.areas.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    for (Index v : t) require(v >= 0 && v < nv, "mesh: triangle references a missing vertex");
    const Vec3& a = mesh.vertices[static_cast<std::size_t>(t[0])];
    const Vec3& b = mesh.vertices[static_cast<std::size_t>(t[1])];
    const Vec3& c = mesh.vertices[static_cast<std::size_t>(t[2])];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    require(area > 0.0, "mesh: degenerate triangle");
    mesh.centroids.push_back((a + b + c) / 3.0);
    mesh.areas.push_back(area);
  }
  return mesh;
}

double TriangleMesh::total_area() const {
  double sum = 0.0;
  for (double a : areas) sum += a;
  return sum;
}

namespace {

template <class Height>
TriangleMesh grid_mesh(int n, Height height) {
  require(n >= 1, "mesh: n must be positive");
  std::vector<Vec3> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double y = static_cast<double>(j) / n;
      vertices.emplace_back(x, y, height(x, y));
    }
  }
  std::vector<std::array<Index, 3>> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Index a = j * (n + 1) + i;
      const Index b = a + 1;
      const Index c = a + n + 1;
      const Index d = c + 1;
      triangles.push_back({a, b, d});
      triangles.push_back({a, d, c});
    }
  }
  return TriangleMesh::from_parts(std::move(vertices), std::move(triangles));
}

}  // namespace

TriangleMesh make_unit_square_mesh(int n) {
  return grid_mesh(n, [](double, double) { return 0.0; });
}

TriangleMesh make_open_surface_mesh(int n) {
  using std::numbers::pi;
  return grid_mesh(n, [](double x, double y) { return 0.2 * std::sin(pi * x) * std::sin(pi * y); });
}

void write_mesh(const TriangleMesh& mesh, std::ostream& out) {
  char buf[128];
  out << mesh.vertices.size() << ' ' << mesh.triangles.size() << '\n';
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw std::runtime_error("mesh: write failed");
}

TriangleMesh read_mesh(std::istream& in) {
  Index nv = -1, nt = -1;
  if (!(in >> nv >> nt) || nv < 0 || nt < 0) throw std::invalid_argument("mesh: bad header");
  std::vector<Vec3> vertices(static_cast<std::size_t>(nv));
  for (Vec3& v : vertices) {
    std::string x, y, z;
    if (!(in >> x >> y >> z)) throw std::invalid_argument("mesh: truncated vertex list");
    v = Vec3(std::stod(x), std::stod(y), std::stod(z));
  }
  std::vector<std::array<Index, 3>> triangles(static_cast<std::size_t>(nt));
  for (auto& t : triangles)
    if (!(in >> t[0] >> t[1] >> t[2])) throw std::invalid_argument("mesh: truncated triangle list");
  return TriangleMesh::from_parts(std::move(vertices), std::move(triangles));
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "single_layer" || name == "electrostatic") return KernelKind::single_layer;
  if (name == "hypersingular") return KernelKind::hypersingular;
  throw std::invalid_argument("unknown kernel: " + std::string(name));
}

std::string_view to_string(KernelKind kind) {
  return kind == KernelKind::single_layer ? "single_layer" : "hypersingular";
}

double Kernel::operator()(const Vec3& x, const Vec3& y) const {
  const double r = (x - y).norm();
  return kind == KernelKind::single_layer ? 1.0 / r : 1.0 / (r * r * r);
}

double Kernel::self_term(double area) const {
  using std::numbers::pi;
  if (kind == KernelKind::single_layer) return 2.0 * std::sqrt(pi * area);
  return -2.0 * pi / std::sqrt(area / pi);
}

Matrix assemble_dense(const PointSet& points, Kernel kernel, Index dense_cap) {
  points.validate();
  const Index n = points.size();
  if (n > dense_cap)
    throw InfeasibleError("dense assembly refused: N = " + std::to_string(n) +
                          " exceeds the dense cap " + std::to_string(dense_cap));
  Matrix a(n, n);
  for (Index j = 0; j < n; ++j) {
    const Vec3& y = points.coords[static_cast<std::size_t>(j)];
    const double w = points.weights[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      a(i, j) = i == j ? kernel.self_term(w) : w * kernel(points.coords[static_cast<std::size_t>(i)], y);
    }
  }
  return a;
}

Matrix assemble_dense(const TriangleMesh& mesh, Kernel kernel, Index dense_cap) {
  return assemble_dense(mesh.points(), kernel, dense_cap);
}

}  // namespace h2se
