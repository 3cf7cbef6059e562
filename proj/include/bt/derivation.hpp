#pragma once

#include <cstddef>

#include "bt/consistency.hpp"
#include "bt/pathfield.hpp"
#include "bt/transport.hpp"

namespace bt {

/// Transport coefficients Γ(s) along a path (real bundles). Transported
/// vectors solve du/ds + Γ(s)·u = 0.
class CoefficientField {
 public:
  explicit CoefficientField(MatrixField<double> gamma);

  const MatrixField<double>& gamma() const noexcept { return gamma_; }
  const Grid& grid() const noexcept { return gamma_.grid(); }
  std::size_t size() const noexcept { return gamma_.size(); }
  std::size_t dimension() const noexcept { return gamma_.dimension(); }

  /// Γ at parameter s inside [s_k, s_{k+1}]: the evaluator when the field
  /// is analytic, linear interpolation between the two samples otherwise.
  RMatrix within_interval(std::size_t k, double s) const;

 private:
  MatrixField<double> gamma_;
};

/// Free data of the general compatible Γ, both given in the eigenframe of
/// G. Only the upper triangles are read and then mirrored, so p_free is
/// exactly symmetric and q_free exactly antisymmetric. p_free is used on
/// resonant pairs (g_i + g_j = 0), q_free on the others. Empty = zero.
struct FreeParameters {
  RMatrix p_free;
  RMatrix q_free;
};

/// Y(t, s; Γ): solution of dY/dt = Γ(t)·Y with Y(s, s) = I, integrated by
/// classical RK4 with `substeps` steps per grid interval. Works in either
/// direction along the grid.
RMatrix propagator(const CoefficientField& coeff, std::size_t t, std::size_t s,
                   std::size_t substeps = 1);

/// F(s) = Y(s₀, s; −Γ) = [Y(s, s₀; −Γ)]⁻¹, so H(t, s) = Y(t, s; −Γ).
TransportLaw<double> frame_from_coefficients(const CoefficientField& coeff, std::size_t s0 = 0,
                                             std::size_t substeps = 1);

/// Residual of dG/ds = Γᵀ·G + G·Γ at each sample. dG/ds comes from
/// `derivative` (exact when the metric carries one). Tolerance is
/// tol·max_s(‖G‖ + ‖dG/ds‖).
ConsistencyReport compatibility_residual(const MetricField<double>& G,
                                         const CoefficientField& coeff,
                                         double tol = kDefaultTol);

/// The compatible Γ at one point, from G, dG/ds and the free data:
/// Γ = D·(P + Q·G̃ + R)·Dᵀ with D the orthogonal eigenvector matrix of G,
/// G̃ its eigenvalues and K = Dᵀ·(dG/ds)·D.
RMatrix compatible_coefficients(const RMatrix& G, const RMatrix& dG, const FreeParameters& free,
                                double tol = kDefaultTol);

/// compatible_coefficients at every sample. The result is analytic when G
/// carries both an evaluator and an exact derivative.
CoefficientField coefficients_from_metric(const MetricField<double>& G,
                                          const FreeParameters& free = {},
                                          double tol = kDefaultTol);

/// G(s) = F(s)ᵀ·C·F(s) with F from frame_from_coefficients; G(s₀) = C.
MetricField<double> metrics_from_coefficients(const CoefficientField& coeff, const RMatrix& C,
                                              std::size_t s0 = 0, std::size_t substeps = 1);

/// Γ = Γ₁ + Γ₂·G with Γ₁ the symmetric solution of G·Γ₁ + Γ₁·G = dG/ds.
/// Γ₂ must be antisymmetric at every sample.
CoefficientField euclidean_split(const MetricField<double>& G, const MatrixField<double>& gamma2,
                                 double tol = kDefaultTol);

}  // namespace bt
