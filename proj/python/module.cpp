#include "h2se/condition.hpp"
#include "h2se/experiment.hpp"
#include "h2se/seform.hpp"
#include "h2se/solvers.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

namespace py = pybind11;
using namespace h2se;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix stack(const std::vector<Vec3>& v) {
  RowMatrix m(static_cast<Index>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<Index>(i)) = v[i].transpose();
  return m;
}

Eigen::Matrix<Index, Eigen::Dynamic, 3, Eigen::RowMajor> triangles(const TriangleMesh& mesh) {
  Eigen::Matrix<Index, Eigen::Dynamic, 3, Eigen::RowMajor> t(mesh.size(), 3);
  for (Index i = 0; i < mesh.size(); ++i)
    for (int k = 0; k < 3; ++k) t(i, k) = mesh.triangles[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  return t;
}

H2Matrix build_from_dense(const Matrix& dense, const RowMatrix& points, Index leaf_size, double eta,
                          double tol, Index fixed_rank) {
  require(points.cols() == 3, "points must have shape (N, 3)");
  require(dense.rows() == dense.cols() && dense.rows() == points.rows(), "dense must be N x N");
  PointSet ps;
  for (Index i = 0; i < points.rows(); ++i) {
    ps.coords.push_back(points.row(i).transpose());
    ps.weights.push_back(1.0);
  }
  auto tree = std::make_shared<const ClusterTree>(ClusterTree::build(ps, leaf_size));
  const BlockPartition part = build_partition(*tree, *tree, eta);
  H2BuildOptions options;
  options.tol = tol;
  options.fixed_rank = fixed_rank;
  return build_h2_dense(dense, tree, tree, part, options);
}

SolverConfig make_config(const std::string& method, const py::kwargs& kwargs) {
  ExperimentSpec spec;
  set_spec_option(spec, "method", method);
  for (const auto& [key, value] : kwargs)
    set_spec_option(spec, py::str(key).cast<std::string>(), py::str(value).cast<std::string>());
  spec.solver.validate();
  return spec.solver;
}

py::dict report_dict(const IterationReport& r) {
  py::dict d;
  d["method"] = r.method;
  d["residual_history"] = r.residual_history;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["stagnated"] = r.stagnated;
  d["final_residual"] = r.final_residual;
  d["residual_original"] = r.residual_original;
  d["extended_size"] = r.extended_size;
  d["assembly_seconds"] = r.assembly_seconds;
  d["setup_seconds"] = r.setup_seconds;
  d["solve_seconds"] = r.solve_seconds;
  d["preconditioner_bytes"] = r.peak_extra_bytes;
  d["zero_pivots"] = r.zero_pivots;
  d["inner_iterations"] = r.inner_iterations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_h2se, m) {
  m.doc() = "H2 matrices, their sparse extended form and SE-based solvers";

  py::register_exception<InfeasibleError>(m, "InfeasibleError");

  py::class_<TriangleMesh>(m, "Mesh")
      .def_property_readonly("vertices", [](const TriangleMesh& t) { return stack(t.vertices); })
      .def_property_readonly("triangles", &triangles)
      .def_property_readonly("centroids", [](const TriangleMesh& t) { return stack(t.centroids); })
      .def_property_readonly("areas", [](const TriangleMesh& t) { return t.areas; })
      .def("total_area", &TriangleMesh::total_area)
      .def("__len__", &TriangleMesh::size);

  m.def("unit_square_mesh", &make_unit_square_mesh, py::arg("n"));
  m.def("open_surface_mesh", &make_open_surface_mesh, py::arg("n"));
  m.def(
      "assemble_dense",
      [](const TriangleMesh& mesh, const std::string& kernel, Index dense_cap) {
        return assemble_dense(mesh, Kernel{parse_kernel_kind(kernel)}, dense_cap);
      },
      py::arg("mesh"), py::arg("kernel") = "single_layer", py::arg("dense_cap") = kDefaultDenseCap);

  py::class_<H2Matrix, std::shared_ptr<H2Matrix>>(m, "H2Matrix")
      .def_static("from_dense", &build_from_dense, py::arg("dense"), py::arg("points"), py::arg("leaf_size") = 25,
                  py::arg("eta") = 1.0, py::arg("tol") = 1e-6, py::arg("fixed_rank") = 0)
      .def_static(
          "load",
          [](const std::string& path) {
            std::ifstream in(path, std::ios::binary);
            if (!in) throw std::runtime_error("cannot read " + path);
            return load_h2(in);
          },
          py::arg("path"))
      .def(
          "save",
          [](const H2Matrix& a, const std::string& path) {
            std::ofstream out(path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + path);
            save_h2(a, out);
          },
          py::arg("path"))
      .def_property_readonly("shape", [](const H2Matrix& a) { return py::make_tuple(a.rows(), a.cols()); })
      .def_property_readonly("row_ranks", [](const H2Matrix& a) { return a.row_basis().ranks; })
      .def_property_readonly("col_ranks", [](const H2Matrix& a) { return a.col_basis().ranks; })
      .def_property_readonly("far_pairs", [](const H2Matrix& a) { return a.partition().far.size(); })
      .def_property_readonly("close_pairs", [](const H2Matrix& a) { return a.partition().close.size(); })
      .def_property_readonly("depth", [](const H2Matrix& a) { return a.row_tree().depth(); })
      .def("storage_bytes", [](const H2Matrix& a) { return a.storage().bytes(); })
      .def("matvec", &H2Matrix::matvec, py::arg("x"))
      .def("rmatvec", &H2Matrix::matvec_transpose, py::arg("y"))
      .def("reconstruct", &H2Matrix::reconstruct)
      .def("recompress", &recompress, py::arg("delta_svd"));

  py::class_<SEForm>(m, "SEForm")
      .def_property_readonly("n", &SEForm::n)
      .def_property_readonly("size", &SEForm::size)
      .def_property_readonly("depth", &SEForm::depth)
      .def_property_readonly("nnz", [](const SEForm& se) { return se.matrix().nnz(); })
      .def("satisfies_size_bound", &SEForm::satisfies_size_bound)
      .def(
          "csr",
          [](const SEForm& se) {
            const SparseMatrix& h = se.matrix();
            std::vector<Index> ptr(h.offsets().begin(), h.offsets().end());
            std::vector<Index> idx(h.indices().begin(), h.indices().end());
            std::vector<double> val(h.values().begin(), h.values().end());
            return py::make_tuple(ptr, idx, val, py::make_tuple(h.rows(), h.cols()));
          },
          "(indptr, indices, data, shape) of H")
      .def("extend_rhs", &SEForm::extend_rhs, py::arg("y"))
      .def("extract_solution", &SEForm::extract_solution, py::arg("z"))
      .def("matvec", &SEForm::matvec, py::arg("v"));

  m.def("assemble_se", &assemble_se, py::arg("h2"));

  m.def(
      "solve",
      [](const H2Matrix& a, const Vector& y, const std::string& method, const py::kwargs& kwargs) {
        const SolverConfig config = make_config(method, kwargs);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve(a, y, config);
        }
        return py::make_tuple(r.x, report_dict(r.report));
      },
      py::arg("h2"), py::arg("y"), py::arg("method") = "revschur_svdse",
      "Solve A x = y. Keyword options: eps, delta_ilut, fill_max, pivot_tol, delta_svd, k_schur, restart, maxit, "
      "direct_cap.");

  m.def("condition_number", &condition_exact, py::arg("matrix"));
  m.def("methods", [] {
    std::vector<std::string> names;
    for (Method mth : kAllMethods) names.emplace_back(to_string(mth));
    return names;
  });
}
