#pragma once

#include "h2se/common.hpp"
#include "h2se/geometry.hpp"

#include <array>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace h2se {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 3>> triangles;
  // Derived from the two above by from_parts().
  std::vector<Vec3> centroids;
  std::vector<double> areas;

  static TriangleMesh from_parts(std::vector<Vec3> vertices,
                                 std::vector<std::array<Index, 3>> triangles);

  Index size() const { return static_cast<Index>(triangles.size()); }
  double total_area() const;
  PointSet points() const { return {centroids, areas}; }
};

/// Regular n x n grid over [0,1]^2, every square split along its diagonal.
TriangleMesh make_unit_square_mesh(int n);

/// Same grid lifted onto the graph z = 0.2 sin(pi x) sin(pi y).
TriangleMesh make_open_surface_mesh(int n);

/// Text format: "V T", V lines "x y z", T lines "i j k" (zero based).
void write_mesh(const TriangleMesh& mesh, std::ostream& out);
TriangleMesh read_mesh(std::istream& in);

enum class KernelKind { single_layer, hypersingular };

KernelKind parse_kernel_kind(std::string_view name);
std::string_view to_string(KernelKind kind);

/// Collocation kernel with the equal-area-disk self term.
///
/// Off the diagonal the single layer kernel is 1/r and the hypersingular one
/// 1/r^3. On the diagonal the panel of area w is replaced by the disk of
/// radius a = sqrt(w/pi): the 1/r integral is 2*pi*a = 2*sqrt(pi*w), the
/// Hadamard finite part of the 1/r^3 integral is -2*pi/a.
struct Kernel {
  KernelKind kind = KernelKind::single_layer;

  double operator()(const Vec3& x, const Vec3& y) const;
  double self_term(double area) const;
};

inline constexpr Index kDefaultDenseCap = 20000;

/// A(i,j) = w_j * kernel(p_i, p_j) for i != j, A(i,i) = self_term(w_i).
Matrix assemble_dense(const PointSet& points, Kernel kernel, Index dense_cap = kDefaultDenseCap);
Matrix assemble_dense(const TriangleMesh& mesh, Kernel kernel,
                      Index dense_cap = kDefaultDenseCap);

/// f = A q where q(i) = q_exact(centroid_i).
template <class Apply, class Field>
Vector manufactured_rhs(const TriangleMesh& mesh, const Apply& apply, const Field& q_exact) {
  Vector q(mesh.size());
  for (Index i = 0; i < mesh.size(); ++i) q[i] = q_exact(mesh.centroids[static_cast<std::size_t>(i)]);
  return apply(q);
}

}  // namespace h2se
