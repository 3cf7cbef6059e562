#pragma once
// Reference constructions used by the tests. Nothing here calls into the
// library's solvers: matrices are built from known factors so that their
// eigenvalues, signatures and exact derivatives are available directly.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "bt/linalg.hpp"
#include "bt/matrix.hpp"

namespace oracle {

using bt::CMatrix;
using bt::Complex;
using bt::Matrix;
using bt::RMatrix;
using bt::Signature;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(eng_);
  }
  bool coin() { return index(0, 1) == 1; }

  template <bt::Scalar T>
  T scalar(double lo = -1.0, double hi = 1.0) {
    if constexpr (bt::is_complex_v<T>) {
      return {uniform(lo, hi), uniform(lo, hi)};
    } else {
      return uniform(lo, hi);
    }
  }

 private:
  std::mt19937_64 eng_;
};

template <bt::Scalar T>
Matrix<T> random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                        double hi = 1.0) {
  Matrix<T> m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.scalar<T>(lo, hi);
  return m;
}

/// A − A*: antisymmetric (real) or anti-Hermitian (complex).
template <bt::Scalar T>
Matrix<T> random_skew(Rng& rng, std::size_t n, double scale = 1.0) {
  const Matrix<T> a = random_matrix<T>(rng, n, n);
  return (a - a.adjoint()) * T(0.5 * scale);
}

/// Matrix exponential by Taylor series with scaling and squaring.
template <bt::Scalar T>
Matrix<T> expm(const Matrix<T>& a) {
  const double nrm = bt::norm(a);
  int squarings = 0;
  double scaled = nrm;
  while (scaled > 0.25) {
    scaled *= 0.5;
    ++squarings;
  }
  const Matrix<T> x = a * T(std::ldexp(1.0, -squarings));
  Matrix<T> term = Matrix<T>::identity(a.rows());
  Matrix<T> sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = term * x * T(1.0 / k);
    sum += term;
    if (bt::norm(term) <= 1e-18 * bt::norm(sum)) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

template <bt::Scalar T>
Matrix<T> random_unitary(Rng& rng, std::size_t n) {
  return expm(random_skew<T>(rng, n, 3.0));
}

/// Eigenvalue magnitudes drawn from [lo, hi]; the first sig.p are positive.
inline std::vector<double> random_spectrum(Rng& rng, Signature sig, double lo, double hi) {
  std::vector<double> g;
  for (std::size_t i = 0; i < sig.p; ++i) g.push_back(rng.uniform(lo, hi));
  for (std::size_t i = 0; i < sig.q; ++i) g.push_back(-rng.uniform(lo, hi));
  return g;
}

template <bt::Scalar T>
Matrix<T> with_spectrum(const Matrix<T>& u, const std::vector<double>& g) {
  return u * Matrix<T>::diagonal(g) * u.adjoint();
}

/// Self-adjoint, nondegenerate, of the requested signature.
template <bt::Scalar T>
Matrix<T> random_self_adjoint(Rng& rng, Signature sig, double lo = 0.5, double hi = 3.0) {
  const Matrix<T> u = random_unitary<T>(rng, sig.dimension());
  Matrix<T> m = with_spectrum(u, random_spectrum(rng, sig, lo, hi));
  return (m + m.adjoint()) * T(0.5);
}

inline Signature random_signature(Rng& rng, std::size_t n) {
  const std::size_t p = rng.index(0, n);
  return {p, n - p};
}

/// exp(G_{p,q}·A) with A skew: an element of O(p,q) or U(p,q).
template <bt::Scalar T>
Matrix<T> random_pseudo_isometry(Rng& rng, Signature sig, double scale = 1.0) {
  return expm(bt::pseudo_identity<T>(sig) * random_skew<T>(rng, sig.dimension(), scale));
}

/// Smooth, well-conditioned frame field: σ_min(F(s)) ≥ 0.5 for all s.
template <bt::Scalar T>
struct FrameFamily {
  Matrix<T> a, b, c;

  Matrix<T> operator()(double s) const {
    const std::size_t n = a.rows();
    return Matrix<T>::identity(n) * T(2.0) +
           (a + b * T(std::sin(s)) + c * T(std::cos(2.0 * s))) * T(0.5 / static_cast<double>(n));
  }
};

template <bt::Scalar T>
FrameFamily<T> random_frame_family(Rng& rng, std::size_t n) {
  return {random_matrix<T>(rng, n, n), random_matrix<T>(rng, n, n), random_matrix<T>(rng, n, n)};
}

/// G(s) = R(s)·Λ(s)·R(s)* with R(s) = exp(s·A), A skew, and eigenvalue
/// curves λ_i(s) = c_i + a_i·sin(ω_i·s) that keep their sign. Positive
/// eigenvalues stay in [3, 5] and negative ones in [−1.5, −0.5], so no pair
/// of eigenvalues ever sums to zero.
template <bt::Scalar T>
struct MetricFamily {
  Matrix<T> generator;  // A
  std::vector<double> centre, amplitude, omega;

  std::size_t dimension() const { return centre.size(); }
  Matrix<T> rotation(double s) const { return expm(generator * T(s)); }
  std::vector<double> eigenvalues(double s) const {
    std::vector<double> g(centre.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = centre[i] + amplitude[i] * std::sin(omega[i] * s);
    return g;
  }
  std::vector<double> eigenvalue_rates(double s) const {
    std::vector<double> g(centre.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      g[i] = amplitude[i] * omega[i] * std::cos(omega[i] * s);
    return g;
  }
  Matrix<T> metric(double s) const {
    const Matrix<T> m = with_spectrum(rotation(s), eigenvalues(s));
    return (m + m.adjoint()) * T(0.5);
  }
  Matrix<T> metric_rate(double s) const {
    const Matrix<T> r = rotation(s);
    const Matrix<T> lam = Matrix<T>::diagonal(eigenvalues(s));
    const Matrix<T> dr = generator * r;
    const Matrix<T> m = dr * lam * r.adjoint() + r * Matrix<T>::diagonal(eigenvalue_rates(s)) * r.adjoint() +
                        r * lam * dr.adjoint();
    return (m + m.adjoint()) * T(0.5);
  }
};

template <bt::Scalar T>
MetricFamily<T> random_metric_family(Rng& rng, Signature sig, double rotation_scale = 1.0) {
  MetricFamily<T> f;
  f.generator = random_skew<T>(rng, sig.dimension(), rotation_scale);
  for (std::size_t i = 0; i < sig.dimension(); ++i) {
    const bool positive = i < sig.p;
    f.centre.push_back(positive ? 4.0 : -1.0);
    f.amplitude.push_back(rng.uniform(-0.5, 0.5) * (positive ? 2.0 : 1.0));
    f.omega.push_back(rng.uniform(0.5, 3.0));
  }
  return f;
}

/// Relative Frobenius distance ‖a − b‖ / max(1, ‖b‖).
template <bt::Scalar T>
double rel_diff(const Matrix<T>& a, const Matrix<T>& b) {
  return bt::norm(a - b) / std::max(1.0, bt::norm(b));
}

/// Circular distance between two angles.
inline double angle_distance(double a, double b) {
  const double two_pi = 2.0 * 3.14159265358979323846;
  const double d = std::fmod(std::abs(a - b), two_pi);
  return std::min(d, two_pi - d);
}

}  // namespace oracle
