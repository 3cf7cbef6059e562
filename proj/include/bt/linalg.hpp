#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bt/matrix.hpp"

namespace bt {

/// Relative threshold below which an eigenvalue (or singular value) counts
/// as zero when deciding nondegeneracy.
inline constexpr double kNondegeneracyTol = 1e-10;
/// Default relative tolerance for self-adjointness and resonance tests.
inline constexpr double kDefaultTol = 1e-9;

/// Inertia (p, q) of a nondegenerate self-adjoint form.
struct Signature {
  std::size_t p = 0;
  std::size_t q = 0;

  std::size_t dimension() const noexcept { return p + q; }
  long value() const noexcept { return static_cast<long>(p) - static_cast<long>(q); }
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// G_{p,q} = diag(+1 (p times), -1 (q times)).
template <Scalar T>
Matrix<T> pseudo_identity(Signature sig);

template <Scalar T>
struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  Matrix<T> vectors;                // columns are orthonormal eigenvectors
  int sweeps = 0;
  /// Largest |Im| seen on the rotated diagonal before it was made real;
  /// zero for real input.
  double max_imag_diagonal = 0.0;
};

/// Cyclic Jacobi diagonalization of a symmetric or Hermitian matrix.
///
/// Eigenvalues come back in descending order (ties keep their original
/// index order) and each eigenvector is phase-normalized so its
/// largest-magnitude entry is real and positive. Throws NotSelfAdjoint when
/// ‖G − G*‖ > tol·‖G‖ and NoConvergence after 30 sweeps.
template <Scalar T>
EigenDecomposition<T> sym_eigen(const Matrix<T>& G, double tol = kDefaultTol);

template <Scalar T>
Signature signature(const Matrix<T>& G, double tol = kNondegeneracyTol);

template <Scalar T>
struct CongruenceFrame {
  Matrix<T> D;  // D*·G·D = G_{p,q}
  std::vector<double> eigenvalues;
  Matrix<T> D1;  // unitary eigenvector matrix
  Signature signature;

  /// D⁻¹ = diag(|g|^{1/2})·D1*, formed without a general inversion.
  Matrix<T> inverse() const;
};

/// D = D1·diag(|g_i|^{-1/2}); positive directions come first because the
/// eigenvalues are sorted in descending order.
template <Scalar T>
CongruenceFrame<T> congruence_normalizer(const Matrix<T>& G,
                                         double tol = kNondegeneracyTol);

/// ‖Z*·G_{p,q}·Z − G_{p,q}‖ ≤ tol (absolute, Frobenius).
template <Scalar T>
bool is_pseudo_isometry(const Matrix<T>& Z, Signature sig, double tol);

/// Symmetric solution Γ₁ of G·Γ₁ + Γ₁·G = K.
///
/// K is given in the same frame as G. Internally K̃ = D1*·K·D1 and
/// Γ₀_ij = K̃_ij/(g_i + g_j); pairs with |g_i + g_j| ≤ tol·max(|g_i|,|g_j|)
/// are resonant and take their Γ₀ entry from `resonant_fill` (zero when
/// absent), provided |K̃_ij| ≤ tol·‖K‖. Otherwise NoSymmetricSolution.
template <Scalar T>
Matrix<T> lyapunov_spectral(const Matrix<T>& G, const Matrix<T>& K,
                            double tol = kDefaultTol,
                            const Matrix<T>* resonant_fill = nullptr);

/// ∫₀^T exp(−Gt)·K·exp(−Gt) dt for positive-definite G, with the horizon T
/// chosen so exp(−2·λ_min·T) ≤ horizon_tol. Geometrically graded
/// Gauss–Legendre panels resolve the fast modes near t = 0.
template <Scalar T>
Matrix<T> lyapunov_integral(const Matrix<T>& G, const Matrix<T>& K,
                            double horizon_tol = 1e-15);

/// Partial-pivot LU of a square matrix.
template <Scalar T>
class LuDecomposition {
 public:
  explicit LuDecomposition(const Matrix<T>& A);

  bool singular() const noexcept { return singular_; }
  std::vector<T> solve(std::vector<T> b) const;
  Matrix<T> solve(const Matrix<T>& B) const;
  Matrix<T> inverse() const;

 private:
  Matrix<T> lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = false;
};

/// Inverse of a nondegenerate matrix. The conditioning guard uses the
/// lower bound σ_min ≥ 1/‖A⁻¹‖_F and fails with `failure_kind` when that
/// estimate is ≤ guard·‖A‖.
template <Scalar T>
Matrix<T> guarded_inverse(const Matrix<T>& A, double guard = 1e-12,
                          ErrorKind failure_kind = ErrorKind::SingularFrame);

/// Lower-bound estimate of the smallest singular value (1/‖A⁻¹‖_F); zero
/// when the LU factorization breaks down.
template <Scalar T>
double min_singular_estimate(const Matrix<T>& A);

/// Nodes and weights of the m-point Gauss–Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(std::size_t points);

}  // namespace bt
