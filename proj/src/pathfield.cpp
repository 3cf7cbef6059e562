#include "bt/pathfield.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bt {

Grid::Grid(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw Error(ErrorKind::ValidationError, "grid needs at least two samples");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw Error(ErrorKind::ValidationError, "grid sample is not finite");
    }
    if (i > 0 && !(samples_[i] > samples_[i - 1])) {
      throw Error(ErrorKind::ValidationError, "grid samples must be strictly increasing");
    }
  }
}

Grid Grid::uniform(double start, double end, std::size_t steps) {
  if (steps == 0) throw Error(ErrorKind::ValidationError, "uniform grid needs steps >= 1");
  std::vector<double> s(steps + 1);
  const double h = (end - start) / static_cast<double>(steps);
  for (std::size_t i = 0; i <= steps; ++i) s[i] = start + h * static_cast<double>(i);
  s.back() = end;
  return Grid(std::move(s));
}

template <Scalar T>
MatrixField<T>::MatrixField(Grid grid, std::vector<Matrix<T>> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "field has a different sample count than its grid");
  }
  const std::size_t n = values_.front().rows();
  for (const auto& m : values_) {
    if (!m.is_square() || m.rows() != n || n == 0) {
      throw Error(ErrorKind::DimensionMismatch, "field values must share one square dimension");
    }
    if (!all_finite(m)) throw Error(ErrorKind::ValidationError, "field value is not finite");
  }
}

template <Scalar T>
MatrixField<T> MatrixField<T>::from_evaluator(Grid grid, Evaluator f, Evaluator df) {
  std::vector<Matrix<T>> values;
  values.reserve(grid.size());
  for (double s : grid.samples()) {
    Matrix<T> m = f(s);
    if (!all_finite(m)) {
      throw Error(ErrorKind::EvaluationFailure,
                  "evaluator returned non-finite entries at s = " + std::to_string(s));
    }
    values.push_back(std::move(m));
  }
  MatrixField field(std::move(grid), std::move(values));
  field.source_ = FieldSource::analytic;
  field.evaluator_ = std::move(f);
  field.derivative_ = std::move(df);
  return field;
}

template <Scalar T>
Matrix<T> MatrixField<T>::at(double s) const {
  if (evaluator_) return evaluator_(s);
  for (std::size_t i = 0; i < grid_.size(); ++i)
    if (grid_[i] == s) return values_[i];
  throw Error(ErrorKind::ValidationError, "sampled field queried off its grid");
}

template <Scalar T>
MatrixField<T> sample_analytic(typename MatrixField<T>::Evaluator f, Grid grid,
                               typename MatrixField<T>::Evaluator df) {
  return MatrixField<T>::from_evaluator(std::move(grid), std::move(f), std::move(df));
}

template <Scalar T>
Matrix<T> derivative(const MatrixField<T>& field, std::size_t index) {
  const Grid& g = field.grid();
  if (index >= g.size()) throw Error(ErrorKind::DimensionMismatch, "derivative index off grid");
  if (field.has_exact_derivative()) return field.derivative_evaluator()(g[index]);
  if (g.size() < 3) {
    throw Error(ErrorKind::TooFewSamples, "finite differences need at least three samples");
  }

  // Three-point Lagrange stencil on (x0, x1, x2) differentiated at `at`.
  auto stencil = [&](std::size_t i0, double at) {
    const double x0 = g[i0], x1 = g[i0 + 1], x2 = g[i0 + 2];
    const double w0 = ((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2));
    const double w1 = ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2));
    const double w2 = ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1));
    return field[i0] * T{w0} + field[i0 + 1] * T{w1} + field[i0 + 2] * T{w2};
  };
  if (index == 0) return stencil(0, g[0]);
  if (index + 1 == g.size()) return stencil(index - 2, g[index]);
  return stencil(index - 1, g[index]);
}

template <Scalar T>
MetricField<T>::MetricField(MatrixField<T> field, double self_adjoint_tol,
                            double nondegeneracy_tol)
    : field_(std::move(field)) {
  signatures_.reserve(field_.size());
  for (std::size_t i = 0; i < field_.size(); ++i) {
    const Matrix<T>& g = field_[i];
    const double scale = norm(g);
    scale_ = std::max(scale_, scale);
    if (self_adjoint_defect(g) > self_adjoint_tol * scale) {
      throw Error(ErrorKind::NotSelfAdjoint,
                  "metric sample " + std::to_string(i) + " is not self-adjoint");
    }
    signatures_.push_back(signature(g, nondegeneracy_tol));
  }
}

template <Scalar T>
bool MetricField<T>::signature_constant() const {
  for (const auto& s : signatures_)
    if (!(s == signatures_.front())) return false;
  return true;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::string_view token) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorKind::ParseError, "cannot parse numeric token '" + std::string(token) + "'");
  }
  return v;
}

Complex parse_complex(std::string_view raw) {
  const std::string_view token = trim(raw);
  if (token.empty()) throw Error(ErrorKind::ParseError, "empty numeric token");
  if (token.back() != 'j' && token.back() != 'J') return {parse_double(token, token), 0.0};

  const std::string_view body = token.substr(0, token.size() - 1);
  auto unit = [&](std::string_view part) {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    return parse_double(part, token);
  };
  for (std::size_t pos = body.size(); pos-- > 1;) {
    if ((body[pos] == '+' || body[pos] == '-') && body[pos - 1] != 'e' && body[pos - 1] != 'E') {
      return {parse_double(body.substr(0, pos), token), unit(body.substr(pos))};
    }
  }
  return {0.0, unit(body)};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

template <Scalar T>
T parse_scalar_token(std::string_view token) {
  const Complex z = parse_complex(token);
  if constexpr (is_complex_v<T>) {
    return z;
  } else {
    if (z.imag() != 0.0) {
      throw Error(ErrorKind::ParseError,
                  "complex token '" + std::string(token) + "' in a real field");
    }
    return z.real();
  }
}

template <Scalar T>
std::string format_scalar(const T& value) {
  if constexpr (is_complex_v<T>) {
    std::string im = format_double(value.imag());
    if (im.front() != '-') im.insert(im.begin(), '+');
    return format_double(value.real()) + im + "j";
  } else {
    return format_double(value);
  }
}

template <Scalar T>
MatrixField<T> read_field_csv(std::istream& in) {
  std::vector<double> samples;
  std::vector<Matrix<T>> values;
  std::size_t n = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;

    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = view.find(',', start);
      cells.push_back(trim(view.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::size_t entries = cells.size() - 1;
    const auto dim = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(entries))));
    if (entries == 0 || dim * dim != entries) {
      throw Error(ErrorKind::ValidationError,
                  "line " + std::to_string(line_no) + ": entry count is not a perfect square");
    }
    if (n == 0) n = dim;
    if (dim != n) {
      throw Error(ErrorKind::ValidationError,
                  "line " + std::to_string(line_no) + ": dimension differs from earlier rows");
    }
    samples.push_back(parse_double(cells[0], cells[0]));
    Matrix<T> m(n, n);
    for (std::size_t k = 0; k < entries; ++k) m(k / n, k % n) = parse_scalar_token<T>(cells[k + 1]);
    values.push_back(std::move(m));
  }
  if (values.empty()) throw Error(ErrorKind::ValidationError, "CSV field has no rows");
  return MatrixField<T>(Grid(std::move(samples)), std::move(values));
}

template <Scalar T>
MatrixField<T> read_field_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read_field_csv<T>(in);
}

template <Scalar T>
void write_field_csv(std::ostream& out, const MatrixField<T>& field) {
  for (std::size_t k = 0; k < field.size(); ++k) {
    out << format_double(field.grid()[k]);
    for (const T& x : field[k].data()) out << ',' << format_scalar(x);
    out << '\n';
  }
}

#define BT_INSTANTIATE_PATHFIELD(T)                                                          \
  template class MatrixField<T>;                                                             \
  template class MetricField<T>;                                                             \
  template MatrixField<T> sample_analytic<T>(MatrixField<T>::Evaluator, Grid,                \
                                             MatrixField<T>::Evaluator);                     \
  template Matrix<T> derivative<T>(const MatrixField<T>&, std::size_t);                      \
  template T parse_scalar_token<T>(std::string_view);                                        \
  template std::string format_scalar<T>(const T&);                                           \
  template MatrixField<T> read_field_csv<T>(std::istream&);                                  \
  template MatrixField<T> read_field_csv_file<T>(const std::filesystem::path&);              \
  template void write_field_csv<T>(std::ostream&, const MatrixField<T>&);

BT_INSTANTIATE_PATHFIELD(double)
BT_INSTANTIATE_PATHFIELD(Complex)

#undef BT_INSTANTIATE_PATHFIELD

}  // namespace bt
