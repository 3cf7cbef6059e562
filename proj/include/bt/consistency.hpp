#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bt/pathfield.hpp"
#include "bt/transport.hpp"

namespace bt {

/// Pointwise residuals of a consistency check. `tolerance` is already
/// scaled (absolute), and verdict == (max_residual <= tolerance).
struct ConsistencyReport {
  std::vector<double> residuals;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool verdict = false;
};

ConsistencyReport make_report(std::vector<double> residuals, double tolerance);

/// The matrix that enters the preservation equations. Real metrics use G as
/// is; Hermitian metrics enter through Gᵀ, matching the sesquilinear
/// convention g(u, v) = uᵀ·G·v̄ (linear in the first slot).
template <Scalar T>
Matrix<T> gram_form(const Matrix<T>& G);

/// g(u, v) = uᵀ·G·v̄ (reduces to uᵀ·G·v for real scalars).
template <Scalar T>
T scalar_product(const Matrix<T>& G, const std::vector<T>& u, const std::vector<T>& v);

struct PairSampling {
  std::size_t random_pairs_per_sample = 4;
  std::uint64_t seed = 0x6a09e667f3bcc908ULL;
};

/// Residual of G(s) = H*(t,s)·G(t)·H(t,s) (Hermitian: with Gᵀ in place of G).
///
/// All pairs (s₀, t) are checked plus random_pairs_per_sample·N random
/// pairs; residuals[k] is the largest residual among pairs landing at
/// t = k. Tolerance is tol·max_s‖G(s)‖.
///
/// For complex scalars every residual is cross-checked against the
/// component form G(s) = Hᵀ·G(t)·H̄; a disagreement throws std::logic_error.
template <Scalar T>
ConsistencyReport consistency_residual(const MetricField<T>& G, const TransportLaw<T>& law,
                                       double tol = kDefaultTol, PairSampling sampling = {});

template <Scalar T>
struct InvariantGram {
  MatrixField<T> per_sample;  // C(s) = (F⁻¹(s))*·G(s)·F⁻¹(s)
  Matrix<T> c0;               // C(s₀)
  /// max_s ‖C(s) − C₀‖ / ‖C₀‖
  double constancy_defect = 0.0;
  /// max_s ‖C(s) − C(s)*‖ / ‖C(s)‖
  double self_adjoint_defect = 0.0;

  bool constant(double tol = kDefaultTol) const { return constancy_defect <= tol; }
};

template <Scalar T>
InvariantGram<T> extract_invariant_gram(const MetricField<T>& G, const TransportLaw<T>& law);

/// G(s) = F*(s)·C·F(s) (Hermitian: assigned to Gᵀ). Every metric consistent
/// with the law along the path has this form for some C.
template <Scalar T>
MetricField<T> metrics_from_transport(const TransportLaw<T>& law, const Matrix<T>& C,
                                      double tol = kDefaultTol);

/// F(s) = Y·Z(s)·D(s)⁻¹ with D(s) the congruence normalizer of the metric
/// (of Gᵀ for Hermitian metrics). Requires a grid-constant signature and
/// Z(s) ∈ O(p,q) / U(p,q); Z is tested with tolerance tol·max(1, ‖Z‖²).
template <Scalar T>
TransportLaw<T> transport_from_metric(const MetricField<T>& G, const Matrix<T>& Y,
                                      const MatrixField<T>& Z, double tol = kDefaultTol);

/// True iff every matrix has the same signature: the criterion for a
/// consistent transport to exist over those points.
template <Scalar T>
bool existence_check(std::span<const Matrix<T>> metrics_at_points,
                     double tol = kNondegeneracyTol);

/// G(s) = (D(s)⁻¹)*·G_{p,q}·D(s)⁻¹ (Hermitian: assigned to Gᵀ). The value
/// at a point depends only on D there, never on the path.
template <Scalar T>
MetricField<T> global_metric_from_frame(const MatrixField<T>& D_field, Signature sig);

/// Real forms of a Hermitian metric h = A + iB acting on realified vectors
/// (Re u, Im u), for h(u, v) = uᵀ·h·v̄:
///   g     = Re h = [[A,  B], [−B, A]]   (symmetric)
///   omega = Im h = [[B, −A], [ A, B]]   (antisymmetric)
struct RealifiedForms {
  RMatrix g;
  RMatrix omega;
};

RealifiedForms split_hermitian(const CMatrix& h, double tol = kDefaultTol);

/// Realified multiplication by i: J = [[0, −I], [I, 0]] (size 2n).
RMatrix complex_structure(std::size_t n);

/// ‖omega − g·J‖ ≤ tol and ‖Jᵀ·g·J − g‖ ≤ tol.
bool j_compatibility_check(const RMatrix& g, const RMatrix& omega, double tol = kDefaultTol);

}  // namespace bt
