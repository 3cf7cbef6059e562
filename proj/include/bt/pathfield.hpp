#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bt/linalg.hpp"
#include "bt/matrix.hpp"

namespace bt {

/// Strictly increasing parameter samples s₀ < … < s_N of a path, N ≥ 1.
class Grid {
 public:
  explicit Grid(std::vector<double> samples);
  /// `steps` intervals, i.e. steps + 1 samples including both ends.
  static Grid uniform(double start, double end, std::size_t steps);

  std::size_t size() const noexcept { return samples_.size(); }
  double operator[](std::size_t i) const { return samples_[i]; }
  double front() const { return samples_.front(); }
  double back() const { return samples_.back(); }
  const std::vector<double>& samples() const noexcept { return samples_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::vector<double> samples_;
};

enum class FieldSource { sampled, analytic };

/// One n×n matrix per grid sample. Analytic fields keep their evaluator
/// (and optionally an exact derivative) so downstream numerics can query
/// off-grid values; nothing is interpolated for sampled fields.
template <Scalar T>
class MatrixField {
 public:
  using Evaluator = std::function<Matrix<T>(double)>;

  MatrixField(Grid grid, std::vector<Matrix<T>> values);
  /// Samples `f` on the grid; see sample_analytic.
  static MatrixField from_evaluator(Grid grid, Evaluator f, Evaluator df = {});

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::size_t dimension() const noexcept { return values_.front().rows(); }
  const Matrix<T>& operator[](std::size_t i) const { return values_[i]; }
  const std::vector<Matrix<T>>& values() const noexcept { return values_; }

  FieldSource source() const noexcept { return source_; }
  const Evaluator& evaluator() const noexcept { return evaluator_; }
  bool has_exact_derivative() const noexcept { return static_cast<bool>(derivative_); }
  const Evaluator& derivative_evaluator() const noexcept { return derivative_; }

  /// Evaluates off-grid when an evaluator exists; otherwise `s` must hit a
  /// sample exactly.
  Matrix<T> at(double s) const;

 private:
  Grid grid_;
  std::vector<Matrix<T>> values_;
  FieldSource source_ = FieldSource::sampled;
  Evaluator evaluator_;
  Evaluator derivative_;
};

/// Samples `f` on the grid. Non-finite values raise EvaluationFailure.
template <Scalar T>
MatrixField<T> sample_analytic(typename MatrixField<T>::Evaluator f, Grid grid,
                               typename MatrixField<T>::Evaluator df = {});

/// dM/ds at grid position `index`: exact when the field carries a
/// derivative evaluator, otherwise the three-point non-uniform stencil
/// (central inside, one-sided second order at the ends).
template <Scalar T>
Matrix<T> derivative(const MatrixField<T>& field, std::size_t index);

/// A field of self-adjoint nondegenerate Gram matrices.
template <Scalar T>
class MetricField {
 public:
  explicit MetricField(MatrixField<T> field, double self_adjoint_tol = kDefaultTol,
                       double nondegeneracy_tol = kNondegeneracyTol);

  const MatrixField<T>& field() const noexcept { return field_; }
  const Grid& grid() const noexcept { return field_.grid(); }
  std::size_t size() const noexcept { return field_.size(); }
  std::size_t dimension() const noexcept { return field_.dimension(); }
  const Matrix<T>& operator[](std::size_t i) const { return field_[i]; }
  const std::vector<Signature>& signatures() const noexcept { return signatures_; }
  bool signature_constant() const;
  /// max_s ‖G(s)‖_F
  double scale() const noexcept { return scale_; }

 private:
  MatrixField<T> field_;
  std::vector<Signature> signatures_;
  double scale_ = 0.0;
};

// CSV rows: `s, m11, m12, …, mnn` (row-major). Complex entries use the
// `re+imj` token form. Blank lines and lines starting with '#' are skipped.

template <Scalar T>
T parse_scalar_token(std::string_view token);

template <Scalar T>
std::string format_scalar(const T& value);

template <Scalar T>
MatrixField<T> read_field_csv(std::istream& in);

template <Scalar T>
MatrixField<T> read_field_csv_file(const std::filesystem::path& path);

template <Scalar T>
void write_field_csv(std::ostream& out, const MatrixField<T>& field);

}  // namespace bt
