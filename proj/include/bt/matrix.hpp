#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <vector>

#include "bt/error.hpp"

namespace bt {

using Complex = std::complex<double>;

template <typename T>
inline constexpr bool is_complex_v = false;
template <typename T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

template <typename T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Complex>;

inline double conj(double x) { return x; }
inline Complex conj(const Complex& z) { return std::conj(z); }
inline double real_part(double x) { return x; }
inline double real_part(const Complex& z) { return z.real(); }
inline double imag_part(double) { return 0.0; }
inline double imag_part(const Complex& z) { return z.imag(); }
inline double abs_sq(double x) { return x * x; }
inline double abs_sq(const Complex& z) { return std::norm(z); }
inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Complex& z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// Dense row-major matrix over double or std::complex<double>.
///
/// The fibre dimensions handled here are small (n <= 8 in practice), so the
/// storage is a plain vector and every operation is a straightforward loop.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw Error(ErrorKind::DimensionMismatch, "ragged matrix literal");
      }
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = T{d[i]};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  Matrix adjoint() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = bt::conj((*this)(i, j));
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  Matrix conjugate() const {
    Matrix out(*this);
    for (auto& x : out.data_) x = bt::conj(x);
    return out;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(T s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator-(Matrix a) { return a *= T{-1}; }
  friend Matrix operator*(Matrix a, T s) { return a *= s; }
  friend Matrix operator*(T s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) {
      throw Error(ErrorKind::DimensionMismatch, "matrix product shape mismatch");
    }
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend std::vector<T> operator*(const Matrix& a, const std::vector<T>& v) {
    if (a.cols_ != v.size()) {
      throw Error(ErrorKind::DimensionMismatch, "matrix-vector shape mismatch");
    }
    std::vector<T> out(a.rows_, T{});
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) out[i] += a(i, j) * v[j];
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw Error(ErrorKind::DimensionMismatch, "matrix shape mismatch");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RMatrix = Matrix<double>;
using CMatrix = Matrix<Complex>;

/// Frobenius norm.
template <Scalar T>
double norm(const Matrix<T>& m) {
  double s = 0.0;
  for (const T& x : m.data()) s += abs_sq(x);
  return std::sqrt(s);
}

template <Scalar T>
double max_abs(const Matrix<T>& m) {
  double s = 0.0;
  for (const T& x : m.data()) s = std::max(s, std::sqrt(abs_sq(x)));
  return s;
}

template <Scalar T>
bool all_finite(const Matrix<T>& m) {
  for (const T& x : m.data())
    if (!is_finite(x)) return false;
  return true;
}

/// ‖G − G*‖ in the Frobenius norm.
template <Scalar T>
double self_adjoint_defect(const Matrix<T>& m) {
  return norm(m - m.adjoint());
}

/// Entrywise real part, used when promoting/demoting scalar fields.
inline RMatrix real_matrix(const CMatrix& m) {
  RMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).real();
  return out;
}

inline RMatrix imag_matrix(const CMatrix& m) {
  RMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).imag();
  return out;
}

inline CMatrix to_complex(const RMatrix& m) {
  CMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

template <Scalar T>
std::ostream& operator<<(std::ostream& os, const Matrix<T>& m) {
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
    os << ']';
  }
  return os << ']';
}

}  // namespace bt
