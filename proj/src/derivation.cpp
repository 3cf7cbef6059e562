#include "bt/derivation.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace bt {

namespace {

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": grids differ");
}

// Upper triangle of `m` mirrored with the given sign; empty means zero.
double mirrored(const RMatrix& m, std::size_t i, std::size_t j, double lower_sign) {
  if (m.empty() || (i == j && lower_sign < 0)) return 0.0;
  return i <= j ? m(i, j) : lower_sign * m(j, i);
}

// One RK4 pass across grid interval k for dY/dτ = sign·Γ(τ)·Y, forward
// (s_k → s_{k+1}) or backward (s_{k+1} → s_k). Returns the interval map Φ,
// so that Y(end) = Φ·Y(start).
RMatrix interval_map(const CoefficientField& coeff, std::size_t k, bool forward, double sign,
                     std::size_t substeps) {
  const double a = coeff.grid()[k];
  const double b = coeff.grid()[k + 1];
  const double start = forward ? a : b;
  const double h = (forward ? b - a : a - b) / static_cast<double>(substeps);
  const auto gen = [&](double tau) { return coeff.within_interval(k, tau) * sign; };

  RMatrix y = RMatrix::identity(coeff.dimension());
  for (std::size_t j = 0; j < substeps; ++j) {
    const double tau = start + static_cast<double>(j) * h;
    const double tau_end = j + 1 == substeps ? (forward ? b : a) : tau + h;
    const RMatrix g_mid = gen(tau + 0.5 * h);
    const RMatrix k1 = gen(tau) * y;
    const RMatrix k2 = g_mid * (y + k1 * (0.5 * h));
    const RMatrix k3 = g_mid * (y + k2 * (0.5 * h));
    const RMatrix k4 = gen(tau_end) * (y + k3 * h);
    y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
  }
  return y;
}

RMatrix propagate(const CoefficientField& coeff, std::size_t t, std::size_t s, double sign,
                  std::size_t substeps) {
  RMatrix y = RMatrix::identity(coeff.dimension());
  if (t > s) {
    for (std::size_t k = s; k < t; ++k) y = interval_map(coeff, k, true, sign, substeps) * y;
  } else {
    for (std::size_t k = s; k > t; --k) y = interval_map(coeff, k - 1, false, sign, substeps) * y;
  }
  return y;
}

void require_positions(const CoefficientField& coeff, std::size_t a, std::size_t b,
                       std::size_t substeps) {
  if (a >= coeff.size() || b >= coeff.size()) {
    throw Error(ErrorKind::DimensionMismatch, "propagator: position off grid");
  }
  if (substeps == 0) throw Error(ErrorKind::ValidationError, "propagator: substeps must be ≥ 1");
}

}  // namespace

CoefficientField::CoefficientField(MatrixField<double> gamma) : gamma_(std::move(gamma)) {}

RMatrix CoefficientField::within_interval(std::size_t k, double s) const {
  const double a = grid()[k];
  const double b = grid()[k + 1];
  if (gamma_.source() == FieldSource::analytic) {
    if (s == a) return gamma_[k];
    if (s == b) return gamma_[k + 1];
    return gamma_.evaluator()(s);
  }
  const double w = (s - a) / (b - a);
  return gamma_[k] * (1.0 - w) + gamma_[k + 1] * w;
}

RMatrix propagator(const CoefficientField& coeff, std::size_t t, std::size_t s,
                   std::size_t substeps) {
  require_positions(coeff, t, s, substeps);
  return propagate(coeff, t, s, 1.0, substeps);
}

TransportLaw<double> frame_from_coefficients(const CoefficientField& coeff, std::size_t s0,
                                             std::size_t substeps) {
  require_positions(coeff, s0, s0, substeps);
  const std::size_t n = coeff.size();
  // W(s) = Y(s, s₀; −Γ), built outward from s₀ one interval at a time.
  std::vector<RMatrix> w(n);
  w[s0] = RMatrix::identity(coeff.dimension());
  for (std::size_t k = s0; k + 1 < n; ++k) {
    w[k + 1] = interval_map(coeff, k, true, -1.0, substeps) * w[k];
  }
  for (std::size_t k = s0; k > 0; --k) {
    w[k - 1] = interval_map(coeff, k - 1, false, -1.0, substeps) * w[k];
  }
  std::vector<RMatrix> frames;
  frames.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    frames.push_back(k == s0 ? w[k] : guarded_inverse(w[k], 1e-12, ErrorKind::SingularFrame));
  }
  return TransportLaw<double>(MatrixField<double>(coeff.grid(), std::move(frames)));
}

ConsistencyReport compatibility_residual(const MetricField<double>& G,
                                         const CoefficientField& coeff, double tol) {
  require_same_grid(G.grid(), coeff.grid(), "compatibility_residual");
  if (G.dimension() != coeff.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "compatibility_residual: dimension mismatch");
  }
  std::vector<double> residuals;
  residuals.reserve(G.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < G.size(); ++k) {
    const RMatrix dG = derivative(G.field(), k);
    const RMatrix& gamma = coeff.gamma()[k];
    residuals.push_back(norm(dG - gamma.transpose() * G[k] - G[k] * gamma));
    scale = std::max(scale, norm(G[k]) + norm(dG));
  }
  return make_report(std::move(residuals), tol * scale);
}

RMatrix compatible_coefficients(const RMatrix& G, const RMatrix& dG, const FreeParameters& free,
                                double tol) {
  const std::size_t n = G.rows();
  if (!G.is_square() || dG.rows() != n || dG.cols() != n) {
    throw Error(ErrorKind::DimensionMismatch, "compatible_coefficients: shape mismatch");
  }
  for (const RMatrix* m : {&free.p_free, &free.q_free}) {
    if (!m->empty() && (m->rows() != n || m->cols() != n)) {
      throw Error(ErrorKind::DimensionMismatch, "compatible_coefficients: free data shape");
    }
  }
  signature(G);  // Degenerate on a singular metric

  const auto eig = sym_eigen(G, tol);
  const RMatrix& d = eig.vectors;
  const std::vector<double>& g = eig.eigenvalues;
  RMatrix k = d.transpose() * dG * d;
  k = (k + k.transpose()) * 0.5;

  RMatrix local(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sum = g[i] + g[j];
      if (std::abs(sum) <= tol * std::max(std::abs(g[i]), std::abs(g[j]))) {
        // Resonant pair: P is free, R absorbs K. Writing R through
        // (g_i − g_j) keeps it exactly antisymmetric.
        const double p = mirrored(free.p_free, i, j, 1.0);
        local(i, j) = p + (k(i, j) - sum * p) / (g[i] - g[j]);
      } else {
        local(i, j) = k(i, j) / sum + mirrored(free.q_free, i, j, -1.0) * g[j];
      }
    }
  }
  return d * local * d.transpose();
}

CoefficientField coefficients_from_metric(const MetricField<double>& G,
                                          const FreeParameters& free, double tol) {
  if (!G.signature_constant()) {
    throw Error(ErrorKind::SignatureNotConstant,
                "coefficients_from_metric: metric signature varies along the path");
  }
  const auto& field = G.field();
  if (field.source() == FieldSource::analytic && field.has_exact_derivative()) {
    auto f = field.evaluator();
    auto df = field.derivative_evaluator();
    return CoefficientField(MatrixField<double>::from_evaluator(
        G.grid(), [f, df, free, tol](double s) {
          return compatible_coefficients(f(s), df(s), free, tol);
        }));
  }
  std::vector<RMatrix> values;
  values.reserve(G.size());
  for (std::size_t k = 0; k < G.size(); ++k) {
    values.push_back(compatible_coefficients(G[k], derivative(field, k), free, tol));
  }
  return CoefficientField(MatrixField<double>(G.grid(), std::move(values)));
}

MetricField<double> metrics_from_coefficients(const CoefficientField& coeff, const RMatrix& C,
                                              std::size_t s0, std::size_t substeps) {
  return metrics_from_transport(frame_from_coefficients(coeff, s0, substeps), C);
}

CoefficientField euclidean_split(const MetricField<double>& G, const MatrixField<double>& gamma2,
                                 double tol) {
  require_same_grid(G.grid(), gamma2.grid(), "euclidean_split");
  if (G.dimension() != gamma2.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "euclidean_split: dimension mismatch");
  }
  for (std::size_t k = 0; k < gamma2.size(); ++k) {
    const RMatrix& m = gamma2[k];
    if (norm(m + m.transpose()) > tol * norm(m)) {
      throw Error(ErrorKind::ValidationError,
                  "euclidean_split: Γ₂ is not antisymmetric at sample " + std::to_string(k));
    }
  }
  const auto combine = [tol](const RMatrix& g, const RMatrix& dg, const RMatrix& g2) {
    return lyapunov_spectral(g, dg, tol) + g2 * g;
  };

  const auto& field = G.field();
  if (field.source() == FieldSource::analytic && field.has_exact_derivative() &&
      gamma2.source() == FieldSource::analytic) {
    auto f = field.evaluator();
    auto df = field.derivative_evaluator();
    auto g2 = gamma2.evaluator();
    return CoefficientField(MatrixField<double>::from_evaluator(
        G.grid(), [f, df, g2, combine](double s) { return combine(f(s), df(s), g2(s)); }));
  }
  std::vector<RMatrix> values;
  values.reserve(G.size());
  for (std::size_t k = 0; k < G.size(); ++k) {
    values.push_back(combine(G[k], derivative(field, k), gamma2[k]));
  }
  return CoefficientField(MatrixField<double>(G.grid(), std::move(values)));
}

}  // namespace bt
