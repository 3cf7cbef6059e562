#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "bt/consistency.hpp"
#include "bt/derivation.hpp"
#include "bt/scenario.hpp"

namespace py = pybind11;
using namespace bt;

namespace {

// Real arrays only accept safe casts, so complex input falls through to the
// complex overload instead of losing its imaginary part.
template <Scalar T>
using Array = py::array_t<T, is_complex_v<T> ? py::array::c_style | py::array::forcecast : py::array::c_style>;

template <Scalar T>
Matrix<T> to_matrix(const Array<T>& a) {
  if (a.ndim() != 2) throw Error(ErrorKind::DimensionMismatch, "expected a 2-d array");
  const auto v = a.template unchecked<2>();
  Matrix<T> m(static_cast<std::size_t>(v.shape(0)), static_cast<std::size_t>(v.shape(1)));
  for (py::ssize_t i = 0; i < v.shape(0); ++i)
    for (py::ssize_t j = 0; j < v.shape(1); ++j) m(i, j) = v(i, j);
  return m;
}

template <Scalar T>
std::vector<Matrix<T>> to_stack(const Array<T>& a) {
  if (a.ndim() != 3) throw Error(ErrorKind::DimensionMismatch, "expected a 3-d array of samples");
  const auto v = a.template unchecked<3>();
  std::vector<Matrix<T>> out;
  for (py::ssize_t k = 0; k < v.shape(0); ++k) {
    Matrix<T> m(static_cast<std::size_t>(v.shape(1)), static_cast<std::size_t>(v.shape(2)));
    for (py::ssize_t i = 0; i < v.shape(1); ++i)
      for (py::ssize_t j = 0; j < v.shape(2); ++j) m(i, j) = v(k, i, j);
    out.push_back(std::move(m));
  }
  return out;
}

template <Scalar T>
py::array_t<T> from_matrix(const Matrix<T>& m) {
  py::array_t<T> a({m.rows(), m.cols()});
  auto v = a.template mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return a;
}

template <Scalar T>
py::array_t<T> from_stack(const std::vector<Matrix<T>>& ms) {
  const std::size_t n = ms.empty() ? 0 : ms.front().rows();
  py::array_t<T> a({ms.size(), n, n});
  auto v = a.template mutable_unchecked<3>();
  for (std::size_t k = 0; k < ms.size(); ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) v(k, i, j) = ms[k](i, j);
  return a;
}

py::dict report_dict(const ConsistencyReport& r) {
  py::dict d;
  d["residuals"] = r.residuals;
  d["max_residual"] = r.max_residual;
  d["tolerance"] = r.tolerance;
  d["verdict"] = r.verdict;
  return d;
}

template <Scalar T>
void bind_scalar(py::module_& m) {
  m.def("signature", [](const Array<T>& g) {
    const Signature s = signature(to_matrix(g));
    return py::make_tuple(s.p, s.q);
  }, py::arg("g"));
  m.def("sym_eigen", [](const Array<T>& g, double tol) {
    const auto e = sym_eigen(to_matrix(g), tol);
    return py::make_tuple(e.eigenvalues, from_matrix(e.vectors));
  }, py::arg("g"), py::arg("tol") = kDefaultTol);
  m.def("lyapunov_spectral", [](const Array<T>& g, const Array<T>& k, double tol) {
    return from_matrix(lyapunov_spectral(to_matrix(g), to_matrix(k), tol));
  }, py::arg("g"), py::arg("k"), py::arg("tol") = kDefaultTol);
  m.def("lyapunov_integral", [](const Array<T>& g, const Array<T>& k) {
    return from_matrix(lyapunov_integral(to_matrix(g), to_matrix(k)));
  }, py::arg("g"), py::arg("k"));
  m.def("transport_matrix", [](const Array<T>& frames, std::vector<double> samples, std::size_t t, std::size_t s) {
    const TransportLaw<T> law(MatrixField<T>(Grid(std::move(samples)), to_stack(frames)));
    return from_matrix(transport_matrix(law, t, s));
  }, py::arg("frames"), py::arg("samples"), py::arg("t"), py::arg("s"));
  m.def("consistency_residual",
        [](const Array<T>& metric, const Array<T>& frames, std::vector<double> samples, double tol) {
          const Grid grid(std::move(samples));
          const MetricField<T> g(MatrixField<T>(grid, to_stack(metric)));
          return report_dict(consistency_residual(g, TransportLaw<T>(MatrixField<T>(grid, to_stack(frames))), tol));
        },
        py::arg("metric"), py::arg("frames"), py::arg("samples"), py::arg("tol") = kDefaultTol);
  m.def("extract_invariant_gram", [](const Array<T>& metric, const Array<T>& frames, std::vector<double> samples) {
    const Grid grid(std::move(samples));
    const MetricField<T> g(MatrixField<T>(grid, to_stack(metric)));
    const auto r = extract_invariant_gram(g, TransportLaw<T>(MatrixField<T>(grid, to_stack(frames))));
    py::dict d;
    d["c0"] = from_matrix(r.c0);
    d["per_sample"] = from_stack(r.per_sample.values());
    d["constancy_defect"] = r.constancy_defect;
    d["self_adjoint_defect"] = r.self_adjoint_defect;
    return d;
  }, py::arg("metric"), py::arg("frames"), py::arg("samples"));
  m.def("metrics_from_transport", [](const Array<T>& frames, std::vector<double> samples, const Array<T>& c) {
    const TransportLaw<T> law(MatrixField<T>(Grid(std::move(samples)), to_stack(frames)));
    return from_stack(metrics_from_transport(law, to_matrix(c)).field().values());
  }, py::arg("frames"), py::arg("samples"), py::arg("c"));
  m.def("existence_check", [](const Array<T>& metrics) {
    const auto ms = to_stack(metrics);
    return existence_check<T>(ms);
  }, py::arg("metrics"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Metric-consistent linear transports along paths";

  auto error = py::register_exception<Error>(m, "BundleTransportError", PyExc_ValueError);
  (void)error;

  bind_scalar<double>(m);
  bind_scalar<Complex>(m);

  m.def("coefficients_from_metric", [](const Array<double>& metric, std::vector<double> samples, double tol) {
    const MetricField<double> g(MatrixField<double>(Grid(std::move(samples)), to_stack(metric)));
    return from_stack(coefficients_from_metric(g, {}, tol).gamma().values());
  }, py::arg("metric"), py::arg("samples"), py::arg("tol") = kDefaultTol);
  m.def("compatibility_residual",
        [](const Array<double>& metric, const Array<double>& gamma, std::vector<double> samples, double tol) {
          const Grid grid(std::move(samples));
          const MetricField<double> g(MatrixField<double>(grid, to_stack(metric)));
          return report_dict(compatibility_residual(g, CoefficientField(MatrixField<double>(grid, to_stack(gamma))), tol));
        },
        py::arg("metric"), py::arg("gamma"), py::arg("samples"), py::arg("tol") = kDefaultTol);
  m.def("frame_from_coefficients",
        [](const Array<double>& gamma, std::vector<double> samples, std::size_t s0, std::size_t substeps) {
          const CoefficientField coeff(MatrixField<double>(Grid(std::move(samples)), to_stack(gamma)));
          return from_stack(frame_from_coefficients(coeff, s0, substeps).frame().values());
        },
        py::arg("gamma"), py::arg("samples"), py::arg("s0") = 0, py::arg("substeps") = 8);
  m.def("split_hermitian", [](const Array<Complex>& h) {
    const auto f = split_hermitian(to_matrix(h));
    return py::make_tuple(from_matrix(f.g), from_matrix(f.omega));
  }, py::arg("h"));
  m.def("j_compatibility_check", [](const Array<double>& g, const Array<double>& omega) {
    return j_compatibility_check(to_matrix(g), to_matrix(omega));
  }, py::arg("g"), py::arg("omega"));
  m.def("run_scenario", [](const std::string& config, std::optional<double> tol) {
    cli::ScenarioOptions opts;
    opts.tolerance_override = tol;
    const auto report = cli::run_scenario(cli::parse_scenario_text(config, opts));
    return cli::report_to_json(report).dump();
  }, py::arg("config"), py::arg("tol") = py::none(),
        "Run a JSON scenario and return the JSON report as a string.");
}
