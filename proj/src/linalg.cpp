#include "bt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace bt {

namespace {

constexpr int kMaxSweeps = 30;
constexpr double kOffDiagonalTol = 1e-13;

template <Scalar T>
void require_square(const Matrix<T>& m, const char* what) {
  if (!m.is_square() || m.rows() == 0) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " must be a non-empty square matrix");
  }
}

template <Scalar T>
double off_diagonal_norm(const Matrix<T>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += abs_sq(a(i, j));
  return std::sqrt(s);
}

// One two-sided Jacobi rotation annihilating a(p, q). For Hermitian input
// the pivot phase is split off first, so the real symmetric 2x2 formulas
// apply unchanged.
template <Scalar T>
void jacobi_rotate(Matrix<T>& a, Matrix<T>& v, std::size_t p, std::size_t q) {
  const T apq = a(p, q);
  const double mag = std::sqrt(abs_sq(apq));
  if (mag == 0.0) return;
  const T phase = apq / mag;

  const double tau = (real_part(a(q, q)) - real_part(a(p, p))) / (2.0 * mag);
  double t;
  if (std::abs(tau) > 1e150) {
    t = 0.5 / tau;
  } else {
    t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  // U restricted to (p, q) = [[c, s·φ], [−s·φ̄, c]]
  const T u_pq = s * phase;
  const T u_qp = -s * conj(phase);
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {  // A ← A·U
    const T akp = a(k, p), akq = a(k, q);
    a(k, p) = c * akp + u_qp * akq;
    a(k, q) = u_pq * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {  // A ← U*·A
    const T apk = a(p, k), aqk = a(q, k);
    a(p, k) = c * apk + conj(u_qp) * aqk;
    a(q, k) = conj(u_pq) * apk + c * aqk;
  }
  for (std::size_t k = 0; k < n; ++k) {  // V ← V·U
    const T vkp = v(k, p), vkq = v(k, q);
    v(k, p) = c * vkp + u_qp * vkq;
    v(k, q) = u_pq * vkp + c * vkq;
  }
  a(p, q) = T{};
  a(q, p) = T{};
}

template <Scalar T>
void normalize_phase(Matrix<T>& v, std::size_t col) {
  const std::size_t n = v.rows();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, std::sqrt(abs_sq(v(i, col))));
  if (best == 0.0) return;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = std::sqrt(abs_sq(v(i, col)));
    if (m >= best * (1.0 - 1e-12)) {
      const T phase = conj(v(i, col) / m);
      for (std::size_t k = 0; k < n; ++k) v(k, col) *= phase;
      v(i, col) = T{real_part(v(i, col))};
      return;
    }
  }
}

}  // namespace

template <Scalar T>
Matrix<T> pseudo_identity(Signature sig) {
  Matrix<T> m(sig.dimension(), sig.dimension());
  for (std::size_t i = 0; i < sig.dimension(); ++i) m(i, i) = T{i < sig.p ? 1.0 : -1.0};
  return m;
}

template <Scalar T>
EigenDecomposition<T> sym_eigen(const Matrix<T>& G, double tol) {
  require_square(G, "sym_eigen input");
  if (!all_finite(G)) throw Error(ErrorKind::Degenerate, "sym_eigen: non-finite entries");
  const double scale = norm(G);
  if (self_adjoint_defect(G) > tol * scale) {
    throw Error(ErrorKind::NotSelfAdjoint, "sym_eigen: matrix is not self-adjoint");
  }

  const std::size_t n = G.rows();
  Matrix<T> a = (G + G.adjoint()) * T{0.5};
  Matrix<T> v = Matrix<T>::identity(n);
  const double threshold = kOffDiagonalTol * scale;

  EigenDecomposition<T> out;
  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (sweep == kMaxSweeps) {
      throw Error(ErrorKind::NoConvergence, "sym_eigen: Jacobi sweeps exhausted");
    }
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(a, v, p, q);
    ++sweep;
  }
  out.sweeps = sweep;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return real_part(a(i, i)) > real_part(a(j, j));
  });

  out.eigenvalues.resize(n);
  out.vectors = Matrix<T>(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.eigenvalues[k] = real_part(a(src, src));
    out.max_imag_diagonal = std::max(out.max_imag_diagonal, std::abs(imag_part(a(src, src))));
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, src);
    normalize_phase(out.vectors, k);
  }
  return out;
}

template <Scalar T>
Signature signature(const Matrix<T>& G, double tol) {
  const auto eig = sym_eigen(G);
  const double scale = norm(G);
  Signature sig;
  for (double g : eig.eigenvalues) {
    if (std::abs(g) <= tol * scale) {
      throw Error(ErrorKind::Degenerate, "signature: matrix is degenerate");
    }
    (g > 0.0 ? sig.p : sig.q) += 1;
  }
  return sig;
}

template <Scalar T>
Matrix<T> CongruenceFrame<T>::inverse() const {
  Matrix<T> out = D1.adjoint();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double w = std::sqrt(std::abs(eigenvalues[i]));
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= w;
  }
  return out;
}

template <Scalar T>
CongruenceFrame<T> congruence_normalizer(const Matrix<T>& G, double tol) {
  auto eig = sym_eigen(G);
  const double scale = norm(G);
  CongruenceFrame<T> frame;
  frame.D = eig.vectors;
  for (std::size_t k = 0; k < eig.eigenvalues.size(); ++k) {
    const double g = eig.eigenvalues[k];
    if (std::abs(g) <= tol * scale) {
      throw Error(ErrorKind::Degenerate, "congruence_normalizer: matrix is degenerate");
    }
    (g > 0.0 ? frame.signature.p : frame.signature.q) += 1;
    const double w = 1.0 / std::sqrt(std::abs(g));
    for (std::size_t i = 0; i < frame.D.rows(); ++i) frame.D(i, k) *= w;
  }
  frame.eigenvalues = std::move(eig.eigenvalues);
  frame.D1 = std::move(eig.vectors);
  return frame;
}

template <Scalar T>
bool is_pseudo_isometry(const Matrix<T>& Z, Signature sig, double tol) {
  if (!Z.is_square() || Z.rows() != sig.dimension()) {
    throw Error(ErrorKind::DimensionMismatch, "is_pseudo_isometry: Z does not match signature");
  }
  const Matrix<T> gpq = pseudo_identity<T>(sig);
  return norm(Z.adjoint() * gpq * Z - gpq) <= tol;
}

template <Scalar T>
Matrix<T> lyapunov_spectral(const Matrix<T>& G, const Matrix<T>& K, double tol,
                            const Matrix<T>* resonant_fill) {
  require_square(G, "lyapunov_spectral G");
  if (K.rows() != G.rows() || K.cols() != G.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "lyapunov_spectral: K shape differs from G");
  }
  const double k_scale = norm(K);
  if (self_adjoint_defect(K) > tol * k_scale) {
    throw Error(ErrorKind::NotSelfAdjoint, "lyapunov_spectral: K is not self-adjoint");
  }
  const auto eig = sym_eigen(G, tol);
  const double g_scale = norm(G);
  const auto& g = eig.eigenvalues;
  for (double gi : g) {
    if (std::abs(gi) <= kNondegeneracyTol * g_scale) {
      throw Error(ErrorKind::Degenerate, "lyapunov_spectral: G is degenerate");
    }
  }

  const std::size_t n = G.rows();
  const Matrix<T>& d1 = eig.vectors;
  const Matrix<T> k_eig = d1.adjoint() * K * d1;
  Matrix<T> gamma0(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double sum = g[i] + g[j];
      const bool resonant = std::abs(sum) <= tol * std::max(std::abs(g[i]), std::abs(g[j]));
      if (!resonant) {
        gamma0(i, j) = k_eig(i, j) / sum;
        continue;
      }
      if (std::sqrt(abs_sq(k_eig(i, j))) > tol * k_scale) {
        throw Error(ErrorKind::NoSymmetricSolution,
                    "lyapunov_spectral: resonant pair (" + std::to_string(i) + ", " +
                        std::to_string(j) + ") carries a nonzero right-hand side");
      }
      gamma0(i, j) = resonant_fill ? (*resonant_fill)(i, j) : T{};
    }
  }
  return d1 * gamma0 * d1.adjoint();
}

template <Scalar T>
Matrix<T> lyapunov_integral(const Matrix<T>& G, const Matrix<T>& K, double horizon_tol) {
  require_square(G, "lyapunov_integral G");
  if (K.rows() != G.rows() || K.cols() != G.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "lyapunov_integral: K shape differs from G");
  }
  if (!(horizon_tol > 0.0 && horizon_tol < 1.0)) {
    throw Error(ErrorKind::ValidationError, "lyapunov_integral: horizon_tol must lie in (0, 1)");
  }
  const auto eig = sym_eigen(G);
  const double lam_max = eig.eigenvalues.front();
  const double lam_min = eig.eigenvalues.back();
  if (!(lam_min > 0.0)) {
    throw Error(ErrorKind::NotPositiveDefinite,
                "lyapunov_integral: G must be positive-definite for the integral to converge");
  }
  const double horizon = -std::log(horizon_tol) / (2.0 * lam_min);

  // Panels [0, τ], [τ, 1.25τ], ... capped at the horizon.
  std::vector<double> edges{0.0};
  double edge = std::min(horizon, 0.25 / lam_max);
  while (edge < horizon) {
    edges.push_back(edge);
    edge *= 1.25;
  }
  edges.push_back(horizon);

  static const GaussLegendreRule rule = gauss_legendre(16);
  const std::size_t n = G.rows();
  const Matrix<T>& v = eig.vectors;
  const Matrix<T> vh = v.adjoint();
  Matrix<T> acc(n, n);
  Matrix<T> scaled(n, n);
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double a = edges[k], b = edges[k + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
      const double t = mid + half * rule.nodes[m];
      // exp(−Gt) = V·diag(e^{−g t})·V*
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scaled(i, j) = v(i, j) * std::exp(-eig.eigenvalues[j] * t);
      const Matrix<T> e = scaled * vh;
      acc += (e * K * e) * T{half * rule.weights[m]};
    }
  }
  return acc;
}

template <Scalar T>
LuDecomposition<T>::LuDecomposition(const Matrix<T>& A) : lu_(A), perm_(A.rows()) {
  require_square(A, "LU input");
  const std::size_t n = A.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = abs_sq(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = abs_sq(lu_(i, k));
      if (m > best) {
        best = m;
        piv = i;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best)) {
      singular_ = true;
      return;
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(piv, j));
      std::swap(perm_[k], perm_[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = lu_(i, k) / lu_(k, k);
      lu_(i, k) = f;
      for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
    }
  }
}

template <Scalar T>
std::vector<T> LuDecomposition<T>::solve(std::vector<T> b) const {
  if (singular_) throw Error(ErrorKind::SingularFrame, "LU solve on a singular matrix");
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw Error(ErrorKind::DimensionMismatch, "LU solve: rhs size");
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  return x;
}

template <Scalar T>
Matrix<T> LuDecomposition<T>::solve(const Matrix<T>& B) const {
  const std::size_t n = lu_.rows();
  if (B.rows() != n) throw Error(ErrorKind::DimensionMismatch, "LU solve: rhs rows");
  Matrix<T> X(n, B.cols());
  std::vector<T> col(n);
  for (std::size_t j = 0; j < B.cols(); ++j) {
    for (std::size_t i = 0; i < n; ++i) col[i] = B(i, j);
    const auto x = solve(col);
    for (std::size_t i = 0; i < n; ++i) X(i, j) = x[i];
  }
  return X;
}

template <Scalar T>
Matrix<T> LuDecomposition<T>::inverse() const {
  return solve(Matrix<T>::identity(lu_.rows()));
}

template <Scalar T>
double min_singular_estimate(const Matrix<T>& A) {
  const LuDecomposition<T> lu(A);
  if (lu.singular()) return 0.0;
  const double inv_norm = norm(lu.inverse());
  return std::isfinite(inv_norm) && inv_norm > 0.0 ? 1.0 / inv_norm : 0.0;
}

template <Scalar T>
Matrix<T> guarded_inverse(const Matrix<T>& A, double guard, ErrorKind failure_kind) {
  const LuDecomposition<T> lu(A);
  if (lu.singular()) throw Error(failure_kind, "matrix is singular");
  Matrix<T> inv = lu.inverse();
  const double inv_norm = norm(inv);
  if (!std::isfinite(inv_norm) || !(1.0 / inv_norm > guard * norm(A))) {
    throw Error(failure_kind, "matrix fails the conditioning guard");
  }
  return inv;
}

GaussLegendreRule gauss_legendre(std::size_t points) {
  GaussLegendreRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    // Chebyshev-like initial guess, then Newton on P_m.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(points) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= points; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<double>(points) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

#define BT_INSTANTIATE_LINALG(T)                                                       \
  template Matrix<T> pseudo_identity<T>(Signature);                                   \
  template EigenDecomposition<T> sym_eigen<T>(const Matrix<T>&, double);              \
  template Signature signature<T>(const Matrix<T>&, double);                          \
  template struct CongruenceFrame<T>;                                                 \
  template CongruenceFrame<T> congruence_normalizer<T>(const Matrix<T>&, double);     \
  template bool is_pseudo_isometry<T>(const Matrix<T>&, Signature, double);           \
  template Matrix<T> lyapunov_spectral<T>(const Matrix<T>&, const Matrix<T>&, double, \
                                          const Matrix<T>*);                          \
  template Matrix<T> lyapunov_integral<T>(const Matrix<T>&, const Matrix<T>&, double); \
  template class LuDecomposition<T>;                                                  \
  template Matrix<T> guarded_inverse<T>(const Matrix<T>&, double, ErrorKind);         \
  template double min_singular_estimate<T>(const Matrix<T>&);

BT_INSTANTIATE_LINALG(double)
BT_INSTANTIATE_LINALG(Complex)

#undef BT_INSTANTIATE_LINALG

}  // namespace bt
