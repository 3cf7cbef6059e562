#include "bt/consistency.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

namespace bt {

namespace {

template <Scalar T>
void require_compatible(const MetricField<T>& G, const TransportLaw<T>& law) {
  if (G.size() != law.size() || !(G.grid() == law.grid())) {
    throw Error(ErrorKind::DimensionMismatch, "metric and transport live on different grids");
  }
  if (G.dimension() != law.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "metric and transport differ in fibre dimension");
  }
}

template <Scalar T>
Matrix<T> hermitian_part(const Matrix<T>& m) {
  return (m + m.adjoint()) * T{0.5};
}

}  // namespace

ConsistencyReport make_report(std::vector<double> residuals, double tolerance) {
  ConsistencyReport report;
  report.residuals = std::move(residuals);
  for (double r : report.residuals) report.max_residual = std::max(report.max_residual, r);
  report.tolerance = tolerance;
  report.verdict = report.max_residual <= tolerance;
  return report;
}

template <Scalar T>
Matrix<T> gram_form(const Matrix<T>& G) {
  if constexpr (is_complex_v<T>) {
    return G.transpose();
  } else {
    return G;
  }
}

template <Scalar T>
T scalar_product(const Matrix<T>& G, const std::vector<T>& u, const std::vector<T>& v) {
  if (u.size() != G.rows() || v.size() != G.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "scalar_product: vector dimension mismatch");
  }
  T acc{};
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) acc += u[i] * G(i, j) * conj(v[j]);
  return acc;
}

template <Scalar T>
ConsistencyReport consistency_residual(const MetricField<T>& G, const TransportLaw<T>& law,
                                       double tol, PairSampling sampling) {
  require_compatible(G, law);
  const std::size_t n_samples = G.size();
  std::vector<Matrix<T>> forms;
  std::vector<double> defects;
  forms.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    forms.push_back(gram_form(G[k]));
    defects.push_back(self_adjoint_defect(G[k]));
  }

  std::vector<double> residuals(n_samples, 0.0);
  auto check_pair = [&](std::size_t s, std::size_t t) {
    const Matrix<T> H = transport_matrix(law, t, s);
    const double r = norm(forms[s] - H.adjoint() * forms[t] * H);
    if constexpr (is_complex_v<T>) {
      // Component form: (g_s)_ij = (g_t)_kl H^k_i conj(H^l_j).
      const double r_component = norm(G[s] - H.transpose() * G[t] * H.conjugate());
      const double h2 = norm(H) * norm(H);
      const double slack = defects[s] + h2 * defects[t] + 1e-12 * G.scale() * (1.0 + h2);
      if (std::abs(r - r_component) > slack) {
        throw std::logic_error("Hermitian consistency: transposed and component forms disagree");
      }
    }
    residuals[t] = std::max(residuals[t], r);
  };

  for (std::size_t t = 0; t < n_samples; ++t) check_pair(0, t);
  std::mt19937_64 rng(sampling.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n_samples - 1);
  const std::size_t extra = sampling.random_pairs_per_sample * n_samples;
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t s = pick(rng);
    const std::size_t t = pick(rng);
    check_pair(s, t);
  }
  return make_report(std::move(residuals), tol * G.scale());
}

template <Scalar T>
InvariantGram<T> extract_invariant_gram(const MetricField<T>& G, const TransportLaw<T>& law) {
  require_compatible(G, law);
  std::vector<Matrix<T>> cs;
  cs.reserve(G.size());
  double sa_defect = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k) {
    const Matrix<T>& finv = law.frame_inverse(k);
    Matrix<T> c = finv.adjoint() * gram_form(G[k]) * finv;
    const double cn = norm(c);
    sa_defect = std::max(sa_defect, cn > 0.0 ? self_adjoint_defect(c) / cn : 0.0);
    cs.push_back(std::move(c));
  }
  Matrix<T> c0 = cs.front();
  const double c0_norm = norm(c0);
  double defect = 0.0;
  for (const auto& c : cs) defect = std::max(defect, norm(c - c0) / c0_norm);
  return InvariantGram<T>{MatrixField<T>(G.grid(), std::move(cs)), std::move(c0), defect,
                          sa_defect};
}

template <Scalar T>
MetricField<T> metrics_from_transport(const TransportLaw<T>& law, const Matrix<T>& C, double tol) {
  if (!C.is_square() || C.rows() != law.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "metrics_from_transport: C dimension mismatch");
  }
  if (self_adjoint_defect(C) > tol * norm(C)) {
    throw Error(ErrorKind::NotSelfAdjoint, "metrics_from_transport: C is not self-adjoint");
  }
  signature(C);  // Degenerate on a singular C

  std::vector<Matrix<T>> values;
  values.reserve(law.size());
  for (const auto& f : law.frame().values()) {
    values.push_back(gram_form(hermitian_part(Matrix<T>(f.adjoint() * C * f))));
  }
  return MetricField<T>(MatrixField<T>(law.grid(), std::move(values)));
}

template <Scalar T>
TransportLaw<T> transport_from_metric(const MetricField<T>& G, const Matrix<T>& Y,
                                      const MatrixField<T>& Z, double tol) {
  if (Z.size() != G.size() || !(Z.grid() == G.grid()) || Z.dimension() != G.dimension() ||
      !Y.is_square() || Y.rows() != G.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "transport_from_metric: shape mismatch");
  }
  if (!G.signature_constant()) {
    throw Error(ErrorKind::SignatureNotConstant,
                "transport_from_metric: metric signature varies along the path");
  }
  const Signature sig = G.signatures().front();
  std::vector<Matrix<T>> frames;
  frames.reserve(G.size());
  for (std::size_t k = 0; k < G.size(); ++k) {
    const double zn = norm(Z[k]);
    if (!is_pseudo_isometry(Z[k], sig, tol * std::max(1.0, zn * zn))) {
      throw Error(ErrorKind::NotPseudoIsometry,
                  "transport_from_metric: Z at sample " + std::to_string(k) +
                      " does not preserve G_{p,q}");
    }
    const auto normalizer = congruence_normalizer(gram_form(G[k]));
    frames.push_back(Y * Z[k] * normalizer.inverse());
  }
  return TransportLaw<T>(MatrixField<T>(G.grid(), std::move(frames)));
}

template <Scalar T>
bool existence_check(std::span<const Matrix<T>> metrics_at_points, double tol) {
  if (metrics_at_points.empty()) return true;
  const Signature first = signature(metrics_at_points.front(), tol);
  bool same = true;
  for (const auto& m : metrics_at_points.subspan(1)) {
    same = (signature(m, tol) == first) && same;  // evaluate all: Degenerate must surface
  }
  return same;
}

template <Scalar T>
MetricField<T> global_metric_from_frame(const MatrixField<T>& D_field, Signature sig) {
  if (sig.dimension() != D_field.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "global_metric_from_frame: signature dimension");
  }
  const Matrix<T> gpq = pseudo_identity<T>(sig);
  std::vector<Matrix<T>> values;
  values.reserve(D_field.size());
  for (const auto& d : D_field.values()) {
    const Matrix<T> dinv = guarded_inverse(d, 1e-12, ErrorKind::SingularFrame);
    values.push_back(gram_form(hermitian_part(Matrix<T>(dinv.adjoint() * gpq * dinv))));
  }
  return MetricField<T>(MatrixField<T>(D_field.grid(), std::move(values)));
}

RealifiedForms split_hermitian(const CMatrix& h, double tol) {
  if (!h.is_square()) throw Error(ErrorKind::DimensionMismatch, "split_hermitian: not square");
  if (self_adjoint_defect(h) > tol * norm(h)) {
    throw Error(ErrorKind::NotSelfAdjoint, "split_hermitian: h is not Hermitian");
  }
  const std::size_t n = h.rows();
  RealifiedForms out{RMatrix(2 * n, 2 * n), RMatrix(2 * n, 2 * n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = h(i, j).real();
      const double b = h(i, j).imag();
      out.g(i, j) = a;
      out.g(i, j + n) = b;
      out.g(i + n, j) = -b;
      out.g(i + n, j + n) = a;
      out.omega(i, j) = b;
      out.omega(i, j + n) = -a;
      out.omega(i + n, j) = a;
      out.omega(i + n, j + n) = b;
    }
  }
  return out;
}

RMatrix complex_structure(std::size_t n) {
  RMatrix j(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    j(i, i + n) = -1.0;
    j(i + n, i) = 1.0;
  }
  return j;
}

bool j_compatibility_check(const RMatrix& g, const RMatrix& omega, double tol) {
  if (!g.is_square() || g.rows() != omega.rows() || g.cols() != omega.cols() ||
      g.rows() % 2 != 0) {
    throw Error(ErrorKind::DimensionMismatch, "j_compatibility_check: forms must be 2n×2n");
  }
  if (g.rows() == 0) return true;
  const RMatrix j = complex_structure(g.rows() / 2);
  return norm(omega - g * j) <= tol && norm(j.transpose() * g * j - g) <= tol;
}

#define BT_INSTANTIATE_CONSISTENCY(T)                                                        \
  template Matrix<T> gram_form<T>(const Matrix<T>&);                                         \
  template T scalar_product<T>(const Matrix<T>&, const std::vector<T>&, const std::vector<T>&); \
  template ConsistencyReport consistency_residual<T>(const MetricField<T>&,                  \
                                                     const TransportLaw<T>&, double,         \
                                                     PairSampling);                          \
  template InvariantGram<T> extract_invariant_gram<T>(const MetricField<T>&,                 \
                                                      const TransportLaw<T>&);               \
  template MetricField<T> metrics_from_transport<T>(const TransportLaw<T>&, const Matrix<T>&, \
                                                    double);                                 \
  template TransportLaw<T> transport_from_metric<T>(const MetricField<T>&, const Matrix<T>&, \
                                                    const MatrixField<T>&, double);          \
  template bool existence_check<T>(std::span<const Matrix<T>>, double);                      \
  template MetricField<T> global_metric_from_frame<T>(const MatrixField<T>&, Signature);

BT_INSTANTIATE_CONSISTENCY(double)
BT_INSTANTIATE_CONSISTENCY(Complex)

#undef BT_INSTANTIATE_CONSISTENCY

}  // namespace bt
