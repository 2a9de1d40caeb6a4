#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "miskrige/analysis.hpp"
#include "miskrige/error.hpp"
#include "miskrige/experiments.hpp"
#include "miskrige/geometry.hpp"
#include "miskrige/io.hpp"
#include "miskrige/kernels.hpp"
#include "miskrige/kriging.hpp"

namespace py = pybind11;
using namespace miskrige;

namespace {

// JSON crosses the boundary as text; the Python wrapper does the dict conversion.
nlohmann::json parse(const std::string& text) { return nlohmann::json::parse(text); }

std::vector<Point> points_from(const Eigen::MatrixXd& xs) {
  std::vector<Point> out;
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.push_back(xs.cols() == 1 ? Point(xs(i, 0)) : Point(xs(i, 0), xs(i, 1)));
  }
  return out;
}

Eigen::MatrixXd matrix_from(const std::vector<Point>& points, std::size_t dim) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < dim; ++a) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = points[i][a];
  }
  return out;
}

Region region_from(double lo, double hi, double ambient_lo, double ambient_hi) {
  return Region::interval(lo, hi, std::min(lo, ambient_lo), std::max(hi, ambient_hi));
}

class PyModel {
 public:
  PyModel(const std::string& kernel, const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
          double nugget, double lo, double hi)
      : model_(fit(make_kernel(kernel_spec_from_json(parse(kernel))),
                   DesignSet(region_from(lo, hi, lo, hi), points_from(xs)), y, nugget)) {}

  Eigen::VectorXd mean(const Eigen::MatrixXd& xs) const { return model_.predict_mean(points_from(xs)); }
  Eigen::VectorXd variance(const Eigen::MatrixXd& xs) const {
    return model_.predict_variance(points_from(xs));
  }
  Eigen::VectorXd coefficients() const { return model_.coefficients(); }
  Eigen::VectorXd residual() const { return model_.residual_on_design(); }
  double rkhs_norm_sq() const { return model_.rkhs_norm_sq(); }

 private:
  KrigingModel model_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Kriging under kernel misspecification";

  auto base = py::register_exception<Error>(m, "Error");
  auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<FactorizationFailed>(m, "FactorizationFailed", numerical.ptr());
  py::register_exception<NumericalBreakdown>(m, "NumericalBreakdown", numerical.ptr());
  (void)validation;

  m.def(
      "design",
      [](const std::string& kind, std::size_t n, std::uint64_t seed, double lo, double hi) {
        const DesignSet d = make_design(parse_design_kind(kind), n, region_from(lo, hi, lo, hi), seed);
        return py::make_tuple(matrix_from(d.points(), 1), d.fill_distance(), d.separation_radius(),
                              d.mesh_ratio());
      },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 1, py::arg("lo") = 0.0, py::arg("hi") = 1.0);

  m.def(
      "kernel_matrix",
      [](const std::string& kernel, const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
        return make_kernel(kernel_spec_from_json(parse(kernel)))
            ->cross_covariance(points_from(xs), points_from(ys));
      },
      py::arg("kernel"), py::arg("xs"), py::arg("ys"));

  m.def("min_eigenvalue", [](const Eigen::MatrixXd& a) { return min_eigenvalue(a); });

  m.def(
      "fit_rate",
      [](const std::vector<double>& ns, const std::vector<double>& errors) {
        if (ns.size() != errors.size()) throw ValidationError("n and error lists differ in length");
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < ns.size(); ++i) pairs.emplace_back(ns[i], errors[i]);
        return to_json(fit_rate(pairs)).dump();
      },
      py::arg("ns"), py::arg("errors"));

  m.def(
      "run_study",
      [](const std::string& config) {
        StudyResult result;
        {
          py::gil_scoped_release release;
          result = run_study(study_config_from_json(parse(config)));
        }
        std::ostringstream rows;
        write_rows_csv(rows, result.rows);
        return py::make_tuple(summary_json(result).dump(), rows.str());
      },
      py::arg("config"));

  py::class_<PyModel>(m, "Model")
      .def(py::init<const std::string&, const Eigen::MatrixXd&, const Eigen::VectorXd&, double,
                    double, double>(),
           py::arg("kernel"), py::arg("xs"), py::arg("y"), py::arg("nugget") = 0.0,
           py::arg("lo") = 0.0, py::arg("hi") = 1.0)
      .def("mean", &PyModel::mean)
      .def("variance", &PyModel::variance)
      .def_property_readonly("coefficients", &PyModel::coefficients)
      .def_property_readonly("residual", &PyModel::residual)
      .def_property_readonly("rkhs_norm_sq", &PyModel::rkhs_norm_sq);
}
