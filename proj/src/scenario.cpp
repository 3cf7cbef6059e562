#include "bt/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <future>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>

#include "bt/consistency.hpp"

namespace bt::cli {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::string_view kToolName = "bundle-transport";
constexpr std::string_view kToolVersion = "0.1.0";

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorKind::ValidationError, message);
}

void reject_unknown(const Json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      invalid(where + ": unknown key '" + key + "'");
    }
  }
}

const Json& require_key(const Json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) invalid(where + ": missing '" + key + "'");
  return *it;
}

const Json& require_object(const Json& value, const std::string& where) {
  if (!value.is_object()) invalid(where + " must be an object");
  return value;
}

double number(const Json& value, const std::string& where) {
  if (!value.is_number()) invalid(where + " must be a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) invalid(where + " must be finite");
  return x;
}

std::size_t count(const Json& value, const std::string& where) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    invalid(where + " must be a non-negative integer");
  }
  return value.get<std::size_t>();
}

std::string text(const Json& value, const std::string& where) {
  if (!value.is_string()) invalid(where + " must be a string");
  return value.get<std::string>();
}

double parse_tolerance_text(const std::string& s, const char* where) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    invalid(std::string(where) + ": cannot parse '" + s + "' as a number");
  }
  if (used != s.size()) invalid(std::string(where) + ": trailing characters in '" + s + "'");
  return x;
}

Grid parse_grid(const Json& value) {
  require_object(value, "grid");
  if (value.contains("samples")) {
    reject_unknown(value, {"samples"}, "grid");
    const Json& arr = value["samples"];
    if (!arr.is_array()) invalid("grid.samples must be an array");
    std::vector<double> samples;
    samples.reserve(arr.size());
    for (const auto& v : arr) samples.push_back(number(v, "grid.samples entry"));
    return Grid(std::move(samples));
  }
  reject_unknown(value, {"start", "end", "steps"}, "grid");
  const double start = number(require_key(value, "start", "grid"), "grid.start");
  const double end = number(require_key(value, "end", "grid"), "grid.end");
  const std::size_t steps = count(require_key(value, "steps", "grid"), "grid.steps");
  return Grid::uniform(start, end, steps);
}

template <Scalar T>
Matrix<T> parse_matrix(const Json& value, const std::string& where) {
  if (!value.is_array() || value.empty()) invalid(where + " must be a non-empty array of rows");
  const std::size_t n = value.size();
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Json& row = value[i];
    if (!row.is_array() || row.size() != n) invalid(where + " must be square");
    for (std::size_t j = 0; j < n; ++j) {
      const Json& entry = row[j];
      if constexpr (is_complex_v<T>) {
        if (entry.is_string()) {
          m(i, j) = parse_scalar_token<T>(entry.get<std::string>());
          continue;
        }
      }
      m(i, j) = T(number(entry, where + " entry"));
    }
  }
  return m;
}

template <Scalar T>
Json matrix_to_json(const Matrix<T>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if constexpr (is_complex_v<T>) {
        row.push_back(format_scalar(m(i, j)));
      } else {
        row.push_back(m(i, j));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

bool grids_match(const Grid& a, const Grid& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12 * std::max(1.0, std::abs(a[i]))) return false;
  }
  return true;
}

std::vector<CheckKind> parse_checks(const Json& value) {
  if (!value.is_array() || value.empty()) invalid("checks must be a non-empty array");
  std::vector<CheckKind> checks;
  for (const auto& v : value) {
    const std::string name = text(v, "checks entry");
    const auto kind = check_kind_from_string(name);
    if (!kind) invalid("unknown check '" + name + "'");
    if (std::find(checks.begin(), checks.end(), *kind) != checks.end()) {
      invalid("check '" + name + "' requested more than once");
    }
    checks.push_back(*kind);
  }
  return checks;
}

Json checks_to_json(const std::vector<CheckKind>& checks) {
  Json arr = Json::array();
  for (auto c : checks) arr.push_back(std::string(to_string(c)));
  return arr;
}

bool has_check(const Scenario& sc, CheckKind kind) {
  return std::find(sc.checks.begin(), sc.checks.end(), kind) != sc.checks.end();
}

void forbid_checks(const Scenario& sc, std::initializer_list<CheckKind> forbidden) {
  for (auto c : forbidden) {
    if (has_check(sc, c)) {
      invalid("check '" + std::string(to_string(c)) + "' does not apply to kind '" +
              std::string(to_string(sc.kind)) + "'");
    }
  }
}

bool complex_scalar(const Json& doc) {
  const auto it = doc.find("scalar");
  if (it == doc.end()) return false;
  const std::string s = text(*it, "scalar");
  if (s == "real") return false;
  if (s == "complex") return true;
  invalid("scalar must be 'real' or 'complex'");
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <Scalar T>
MatrixField<T> constant_field(const Grid& grid, const Matrix<T>& value) {
  const Matrix<T> zero(value.rows(), value.cols());
  return MatrixField<T>::from_evaluator(
      grid, [value](double) { return value; }, [zero](double) { return zero; });
}

void parse_sphere(const Json& doc, Scenario& sc) {
  reject_unknown(doc, {"kind", "description", "colatitude", "holonomy_tolerance", "grid",
                       "checks", "tolerance", "substeps"},
                 "sphere-latitude config");
  sc.colatitude = std::numbers::pi / 3.0;
  if (doc.contains("colatitude")) sc.colatitude = number(doc["colatitude"], "colatitude");
  if (!(sc.colatitude > 0.0 && sc.colatitude < std::numbers::pi)) {
    invalid("colatitude must lie strictly between 0 and pi");
  }
  if (doc.contains("holonomy_tolerance")) {
    sc.holonomy_tolerance = number(doc["holonomy_tolerance"], "holonomy_tolerance");
    if (!(sc.holonomy_tolerance > 0.0)) invalid("holonomy_tolerance must be positive");
  }
  Json grid_json = Json{{"start", 0.0}, {"end", kTwoPi}, {"steps", 10000}};
  if (doc.contains("grid")) grid_json = doc["grid"];
  const Grid grid = parse_grid(grid_json);
  if (has_check(sc, CheckKind::holonomy) &&
      std::abs((grid.back() - grid.front()) - kTwoPi) > 1e-9 * kTwoPi) {
    invalid("holonomy needs a grid spanning exactly one period [s, s + 2pi]");
  }

  const double th = sc.colatitude;
  const RMatrix g = RMatrix::diagonal(std::vector<double>{1.0, std::sin(th) * std::sin(th)});
  RMatrix gamma(2, 2);
  gamma(0, 1) = -std::sin(th) * std::cos(th);
  gamma(1, 0) = std::cos(th) / std::sin(th);

  ScenarioInputs<double> in;
  in.metric = constant_field(grid, g);
  in.coefficients = constant_field(grid, gamma);
  sc.transport = TransportSource::coefficients;
  sc.inputs = std::move(in);
  sc.config["colatitude"] = sc.colatitude;
  sc.config["holonomy_tolerance"] = sc.holonomy_tolerance;
  sc.config["grid"] = grid_json;
}

void parse_exponential(const Json& doc, Scenario& sc) {
  reject_unknown(doc, {"kind", "description", "grid", "checks", "tolerance", "substeps"},
                 "exponential-diagonal config");
  forbid_checks(sc, {CheckKind::holonomy});
  const Grid grid = parse_grid(require_key(doc, "grid", "exponential-diagonal config"));
  ScenarioInputs<double> in;
  in.metric = MatrixField<double>::from_evaluator(
      grid,
      [](double s) { return RMatrix::diagonal(std::vector<double>{std::exp(2.0 * s), 1.0}); },
      [](double s) { return RMatrix::diagonal(std::vector<double>{2.0 * std::exp(2.0 * s), 0.0}); });
  sc.transport = TransportSource::generate_coefficients;
  sc.inputs = std::move(in);
}

template <Scalar T>
void parse_probe_points(const Json& doc, Scenario& sc) {
  const Json& pts = require_key(doc, "points", "signature-probe config");
  if (!pts.is_array() || pts.empty()) invalid("points must be a non-empty array of matrices");
  ScenarioInputs<T> in;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    in.points.push_back(parse_matrix<T>(pts[k], "points[" + std::to_string(k) + "]"));
    if (in.points.back().rows() != in.points.front().rows()) {
      invalid("all probe points must share one dimension");
    }
  }
  sc.inputs = std::move(in);
}

void parse_probe(const Json& doc, Scenario& sc) {
  reject_unknown(doc, {"kind", "description", "scalar", "points", "checks", "tolerance"},
                 "signature-probe config");
  forbid_checks(sc, {CheckKind::consistency, CheckKind::compatibility, CheckKind::invariant_gram,
                     CheckKind::holonomy, CheckKind::norm_drift});
  if (complex_scalar(doc)) {
    parse_probe_points<Complex>(doc, sc);
  } else {
    parse_probe_points<double>(doc, sc);
  }
}

template <Scalar T>
void parse_custom_typed(const Json& doc, Scenario& sc, const ScenarioOptions& options) {
  ScenarioInputs<T> in;
  std::optional<Grid> grid;
  if (doc.contains("grid")) grid = parse_grid(doc["grid"]);

  const Json& metric = require_object(require_key(doc, "metric", "custom config"), "metric");
  reject_unknown(metric, {"csv", "constant"}, "metric");
  if (metric.contains("csv") == metric.contains("constant")) {
    invalid("metric needs exactly one of 'csv' or 'constant'");
  }
  if (metric.contains("csv")) {
    in.metric = read_field_csv_file<T>(resolve_path(options.base_dir, text(metric["csv"], "metric.csv")));
    if (grid && !grids_match(*grid, in.metric->grid())) {
      invalid("grid does not match the samples of the metric CSV");
    }
  } else {
    if (!grid) invalid("a constant metric needs a grid");
    in.metric = constant_field(*grid, parse_matrix<T>(metric["constant"], "metric.constant"));
  }
  const Grid& path_grid = in.metric->grid();
  const std::size_t n = in.metric->dimension();

  auto load_companion = [&](const char* key, auto tag) {
    using U = decltype(tag);
    auto field = read_field_csv_file<U>(
        resolve_path(options.base_dir, text(doc["transport"][key], std::string("transport.") + key)));
    if (field.dimension() != n) {
      invalid(std::string("transport.") + key + " has dimension " +
              std::to_string(field.dimension()) + " but the metric has dimension " +
              std::to_string(n));
    }
    if (!grids_match(field.grid(), path_grid)) {
      invalid(std::string("transport.") + key + " is sampled on a different grid than the metric");
    }
    return field;
  };

  if (doc.contains("transport")) {
    const Json& tr = require_object(doc["transport"], "transport");
    reject_unknown(tr, {"frame_csv", "coefficient_csv", "generate"}, "transport");
    if (tr.size() != 1) invalid("transport needs exactly one of frame_csv, coefficient_csv, generate");
    if (tr.contains("frame_csv")) {
      in.frame = load_companion("frame_csv", T{});
      sc.transport = TransportSource::frame;
    } else if (tr.contains("coefficient_csv")) {
      if constexpr (is_complex_v<T>) {
        invalid("coefficient fields are only supported for real scalars");
      } else {
        in.coefficients = load_companion("coefficient_csv", double{});
        sc.transport = TransportSource::coefficients;
      }
    } else {
      const std::string mode = text(tr["generate"], "transport.generate");
      if (mode == "frame") {
        sc.transport = TransportSource::generate_frame;
      } else if (mode == "coefficients") {
        if constexpr (is_complex_v<T>) invalid("coefficient generation needs real scalars");
        sc.transport = TransportSource::generate_coefficients;
      } else {
        invalid("transport.generate must be 'frame' or 'coefficients'");
      }
    }
  }
  sc.inputs = std::move(in);
}

void parse_custom(const Json& doc, Scenario& sc, const ScenarioOptions& options) {
  reject_unknown(doc, {"kind", "description", "scalar", "grid", "metric", "transport", "checks",
                       "tolerance", "substeps"},
                 "custom config");
  forbid_checks(sc, {CheckKind::holonomy});
  if (complex_scalar(doc)) {
    parse_custom_typed<Complex>(doc, sc, options);
  } else {
    parse_custom_typed<double>(doc, sc, options);
  }
  const bool coefficient_based = sc.transport == TransportSource::coefficients ||
                                 sc.transport == TransportSource::generate_coefficients;
  if (has_check(sc, CheckKind::compatibility) && !coefficient_based) {
    invalid("compatibility needs a coefficient-based transport");
  }
  for (auto c : {CheckKind::consistency, CheckKind::invariant_gram, CheckKind::norm_drift}) {
    if (has_check(sc, c) && sc.transport == TransportSource::none) {
      invalid("check '" + std::string(to_string(c)) + "' needs a transport");
    }
  }
}

// ---------------------------------------------------------------- running

template <class V, class Build>
const V& memoized(std::optional<V>& slot, std::exception_ptr& failure, Build&& build) {
  if (failure) std::rethrow_exception(failure);
  if (!slot) {
    try {
      slot.emplace(build());
    } catch (...) {
      failure = std::current_exception();
      throw;
    }
  }
  return *slot;
}

CheckResult from_report(CheckKind kind, const ConsistencyReport& r) {
  CheckResult out;
  out.check = kind;
  out.verdict = r.verdict;
  out.max_residual = r.max_residual;
  out.tolerance = r.tolerance;
  out.residuals = r.residuals;
  return out;
}

Json signature_list(std::span<const Signature> sigs) {
  std::vector<Signature> distinct;
  for (const auto& s : sigs) {
    if (std::find(distinct.begin(), distinct.end(), s) == distinct.end()) distinct.push_back(s);
  }
  Json arr = Json::array();
  for (const auto& s : distinct) arr.push_back(Json::array({s.p, s.q}));
  return arr;
}

template <Scalar T>
class Runner {
 public:
  Runner(const Scenario& sc, const ScenarioInputs<T>& in) : sc_(sc), in_(in) {}

  std::vector<double> grid_samples() {
    return in_.metric ? in_.metric->grid().samples() : std::vector<double>{};
  }

  CheckResult run(CheckKind kind) {
    try {
      switch (kind) {
        case CheckKind::consistency:
          return from_report(kind, consistency_residual(metric(), law(), sc_.tolerance));
        case CheckKind::compatibility:
          if constexpr (!is_complex_v<T>) {
            return from_report(kind, compatibility_residual(metric(), coefficients(), sc_.tolerance));
          }
          break;
        case CheckKind::invariant_gram: return invariant_gram();
        case CheckKind::holonomy:
          if constexpr (!is_complex_v<T>) return holonomy();
          break;
        case CheckKind::norm_drift: return norm_drift();
        case CheckKind::existence: return existence();
      }
      throw Error(ErrorKind::ValidationError, "check not available for this scenario");
    } catch (const Error& e) {
      return failed(kind, std::string(bt::to_string(e.kind())), e.what());
    } catch (const std::exception& e) {
      return failed(kind, "InternalError", e.what());
    }
  }

 private:
  static CheckResult failed(CheckKind kind, std::string error_kind, std::string message) {
    CheckResult out;
    out.check = kind;
    out.error = CheckError{std::move(error_kind), std::move(message)};
    return out;
  }

  const MetricField<T>& metric() {
    return memoized(metric_, metric_failure_, [&] {
      if (!in_.metric) throw Error(ErrorKind::ValidationError, "scenario has no metric field");
      return MetricField<T>(*in_.metric, sc_.tolerance);
    });
  }

  const CoefficientField& coefficients()
    requires(!is_complex_v<T>)
  {
    return memoized(coefficients_, coefficients_failure_, [&] {
      if (sc_.transport == TransportSource::coefficients) return CoefficientField(*in_.coefficients);
      return coefficients_from_metric(metric(), {}, sc_.tolerance);
    });
  }

  const TransportLaw<T>& law() {
    return memoized(law_, law_failure_, [&]() -> TransportLaw<T> {
      switch (sc_.transport) {
        case TransportSource::frame: return TransportLaw<T>(*in_.frame);
        case TransportSource::generate_frame: {
          const auto& g = metric();
          const MatrixField<T> z(g.grid(), std::vector<Matrix<T>>(
                                               g.size(), Matrix<T>::identity(g.dimension())));
          return transport_from_metric(g, Matrix<T>::identity(g.dimension()), z, sc_.tolerance);
        }
        case TransportSource::coefficients:
        case TransportSource::generate_coefficients:
          if constexpr (!is_complex_v<T>) {
            return frame_from_coefficients(coefficients(), 0, sc_.substeps);
          }
          break;
        case TransportSource::none: break;
      }
      throw Error(ErrorKind::ValidationError, "scenario has no transport");
    });
  }

  CheckResult invariant_gram() {
    const auto ig = extract_invariant_gram(metric(), law());
    CheckResult out;
    out.check = CheckKind::invariant_gram;
    const double c0n = norm(ig.c0);
    for (const auto& c : ig.per_sample.values()) out.residuals.push_back(norm(c - ig.c0) / c0n);
    out.max_residual = ig.constancy_defect;
    out.tolerance = sc_.tolerance;
    out.verdict = ig.constant(sc_.tolerance);
    out.outputs["self_adjoint_defect"] = ig.self_adjoint_defect;
    out.outputs["c0"] = matrix_to_json(ig.c0);
    return out;
  }

  // Relative change of g(u, u) for every basis vector transported from s₀.
  CheckResult norm_drift() {
    const auto& g = metric();
    const auto& l = law();
    const std::size_t n = g.dimension();
    std::vector<double> residuals(g.size(), 0.0);
    for (std::size_t t = 0; t < g.size(); ++t) {
      const Matrix<T> h = transport_matrix(l, t, 0);
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<T> u(n);
        for (std::size_t r = 0; r < n; ++r) u[r] = h(r, i);
        const T now = scalar_product(g[t], u, u);
        residuals[t] = std::max(residuals[t], std::abs(now - g[0](i, i)) / g.scale());
      }
    }
    auto out = from_report(CheckKind::norm_drift, make_report(std::move(residuals), sc_.tolerance));
    return out;
  }

  CheckResult existence() {
    CheckResult out;
    out.check = CheckKind::existence;
    if (sc_.kind == ScenarioKind::signature_probe) {
      std::vector<Signature> sigs;
      for (const auto& p : in_.points) sigs.push_back(signature(p));
      out.verdict = existence_check<T>(in_.points);
      out.outputs["signatures"] = signature_list(sigs);
    } else {
      const auto& g = metric();
      out.verdict = g.signature_constant();
      out.outputs["signatures"] = signature_list(g.signatures());
    }
    out.outputs["exists"] = out.verdict;
    return out;
  }

  // Rotation of the transported e_θ after one loop, read in the orthonormal
  // frame (e_θ, e_φ / sin θ₀).
  CheckResult holonomy()
    requires(!is_complex_v<T>)
  {
    const auto& l = law();
    const RMatrix h = transport_matrix(l, l.size() - 1, 0);
    const double a = h(0, 0);
    const double b = std::sin(sc_.colatitude) * h(1, 0);
    double angle = std::atan2(b, a);
    if (angle < 0.0) angle += kTwoPi;
    if (angle >= kTwoPi) angle = 0.0;
    const double expected = std::fmod(kTwoPi * (1.0 - std::cos(sc_.colatitude)), kTwoPi);
    const double d = std::fmod(std::abs(angle - expected), kTwoPi);
    const double error = std::min(d, kTwoPi - d);

    CheckResult out;
    out.check = CheckKind::holonomy;
    out.verdict = error <= sc_.holonomy_tolerance;
    out.max_residual = error;
    out.tolerance = sc_.holonomy_tolerance;
    out.outputs["angle"] = angle;
    out.outputs["expected"] = expected;
    out.outputs["transported_norm"] = std::hypot(a, b);
    return out;
  }

  const Scenario& sc_;
  const ScenarioInputs<T>& in_;
  std::optional<MetricField<T>> metric_;
  std::exception_ptr metric_failure_;
  std::optional<CoefficientField> coefficients_;
  std::exception_ptr coefficients_failure_;
  std::optional<TransportLaw<T>> law_;
  std::exception_ptr law_failure_;
};

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) noexcept {
  switch (kind) {
    case ScenarioKind::custom: return "custom";
    case ScenarioKind::sphere_latitude: return "sphere-latitude";
    case ScenarioKind::exponential_diagonal: return "exponential-diagonal";
    case ScenarioKind::signature_probe: return "signature-probe";
  }
  return "unknown";
}

std::string_view to_string(CheckKind kind) noexcept {
  switch (kind) {
    case CheckKind::consistency: return "consistency";
    case CheckKind::compatibility: return "compatibility";
    case CheckKind::invariant_gram: return "invariant-gram";
    case CheckKind::holonomy: return "holonomy";
    case CheckKind::norm_drift: return "norm-drift";
    case CheckKind::existence: return "existence";
  }
  return "unknown";
}

std::optional<ScenarioKind> scenario_kind_from_string(std::string_view name) noexcept {
  for (auto k : {ScenarioKind::custom, ScenarioKind::sphere_latitude,
                 ScenarioKind::exponential_diagonal, ScenarioKind::signature_probe}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<CheckKind> check_kind_from_string(std::string_view name) noexcept {
  for (auto k : {CheckKind::consistency, CheckKind::compatibility, CheckKind::invariant_gram,
                 CheckKind::holonomy, CheckKind::norm_drift, CheckKind::existence}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<ReportFormat> report_format_from_string(std::string_view name) noexcept {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  return std::nullopt;
}

double resolve_tolerance(const std::optional<double>& override_value,
                         const std::optional<double>& config_value,
                         const std::optional<std::string>& env_value) {
  double tol = kDefaultTol;
  if (override_value) {
    tol = *override_value;
  } else if (config_value) {
    tol = *config_value;
  } else if (env_value && !env_value->empty()) {
    tol = parse_tolerance_text(*env_value, "BT_TOL");
  }
  if (!std::isfinite(tol) || !(tol > 0.0)) invalid("tolerance must be a positive finite number");
  return tol;
}

Scenario parse_scenario(const Json& doc, const ScenarioOptions& options) {
  require_object(doc, "config");
  const std::string kind_name = text(require_key(doc, "kind", "config"), "kind");
  const auto kind = scenario_kind_from_string(kind_name);
  if (!kind) invalid("unknown scenario kind '" + kind_name + "'");
  if (doc.contains("description")) text(doc["description"], "description");

  Scenario sc;
  sc.kind = *kind;
  sc.config = doc;
  if (doc.contains("checks")) {
    sc.checks = parse_checks(doc["checks"]);
  } else if (sc.kind == ScenarioKind::sphere_latitude) {
    sc.checks = {CheckKind::holonomy, CheckKind::norm_drift};
  } else {
    invalid("config: missing 'checks'");
  }
  std::optional<double> config_tol;
  if (doc.contains("tolerance")) config_tol = number(doc["tolerance"], "tolerance");
  sc.tolerance = resolve_tolerance(options.tolerance_override, config_tol, options.env_tolerance);
  if (doc.contains("substeps")) {
    sc.substeps = count(doc["substeps"], "substeps");
    if (sc.substeps == 0) invalid("substeps must be at least 1");
  }

  switch (sc.kind) {
    case ScenarioKind::sphere_latitude: parse_sphere(doc, sc); break;
    case ScenarioKind::exponential_diagonal: parse_exponential(doc, sc); break;
    case ScenarioKind::signature_probe: parse_probe(doc, sc); break;
    case ScenarioKind::custom: parse_custom(doc, sc, options); break;
  }
  sc.config["checks"] = checks_to_json(sc.checks);
  sc.config["tolerance"] = sc.tolerance;
  if (sc.kind != ScenarioKind::signature_probe) sc.config["substeps"] = sc.substeps;
  return sc;
}

Scenario parse_scenario_text(std::string_view text_in, const ScenarioOptions& options) {
  Json doc;
  try {
    doc = Json::parse(text_in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_scenario(doc, options);
}

Scenario load_scenario(const std::filesystem::path& path, ScenarioOptions options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (options.base_dir.empty()) options.base_dir = path.parent_path();
  return parse_scenario_text(buf.str(), options);
}

Json sphere_config(double colatitude, std::size_t steps) {
  return Json{{"kind", "sphere-latitude"},
              {"colatitude", colatitude},
              {"grid", {{"start", 0.0}, {"end", kTwoPi}, {"steps", steps}}},
              {"checks", {"holonomy", "norm-drift", "compatibility", "consistency"}}};
}

int RunReport::exit_code() const noexcept {
  bool all_pass = true;
  for (const auto& c : checks) {
    if (c.error) return 2;
    all_pass = all_pass && c.verdict;
  }
  return all_pass ? 0 : 1;
}

RunReport run_scenario(const Scenario& scenario) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = scenario.config;
  std::visit(
      [&](const auto& in) {
        using T = typename std::decay_t<decltype(in)>::value_type;
        Runner<T> runner(scenario, in);
        report.grid = runner.grid_samples();
        for (auto c : scenario.checks) report.checks.push_back(runner.run(c));
      },
      scenario.inputs);
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<RunReport> run_batch(std::span<const Scenario> scenarios) {
  std::vector<std::future<RunReport>> jobs;
  jobs.reserve(scenarios.size());
  for (const auto& sc : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&sc] { return run_scenario(sc); }));
  }
  std::vector<RunReport> out;
  out.reserve(jobs.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

Json report_to_json(const RunReport& report) {
  const int code = report.exit_code();
  Json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["status"] = code == 0 ? "pass" : code == 1 ? "fail" : "error";
  doc["exit_code"] = code;
  doc["config"] = report.config;
  doc["grid"] = report.grid;
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json j;
    j["check"] = to_string(c.check);
    j["verdict"] = c.verdict;
    if (c.max_residual) j["max_residual"] = *c.max_residual;
    if (c.tolerance) j["tolerance"] = *c.tolerance;
    j["residuals"] = c.residuals;
    j["outputs"] = c.outputs;
    if (c.error) j["error"] = Json{{"kind", c.error->kind}, {"message", c.error->message}};
    checks.push_back(std::move(j));
  }
  doc["checks"] = std::move(checks);
  doc["wall_time_seconds"] = report.wall_time_seconds;
  return doc;
}

RunReport report_from_json(const Json& doc) {
  try {
    require_object(doc, "report");
    RunReport r;
    r.config = require_key(doc, "config", "report");
    r.grid = require_key(doc, "grid", "report").get<std::vector<double>>();
    for (const auto& j : require_key(doc, "checks", "report")) {
      CheckResult c;
      const std::string name = text(require_key(j, "check", "check"), "check");
      const auto kind = check_kind_from_string(name);
      if (!kind) invalid("unknown check '" + name + "'");
      c.check = *kind;
      c.verdict = require_key(j, "verdict", "check").get<bool>();
      if (j.contains("max_residual")) c.max_residual = j["max_residual"].get<double>();
      if (j.contains("tolerance")) c.tolerance = j["tolerance"].get<double>();
      c.residuals = require_key(j, "residuals", "check").get<std::vector<double>>();
      c.outputs = require_key(j, "outputs", "check");
      if (j.contains("error")) {
        c.error = CheckError{j["error"]["kind"].get<std::string>(),
                             j["error"]["message"].get<std::string>()};
      }
      r.checks.push_back(std::move(c));
    }
    r.wall_time_seconds = number(require_key(doc, "wall_time_seconds", "report"), "wall_time");
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::ValidationError, std::string("malformed report: ") + e.what());
  }
}

void emit_report(const RunReport& report, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::json) {
    out << report_to_json(report).dump(2) << '\n';
    return;
  }
  out << "s,check,residual\n";
  for (const auto& c : report.checks) {
    if (c.residuals.size() != report.grid.size()) continue;
    for (std::size_t k = 0; k < c.residuals.size(); ++k) {
      out << format_double(report.grid[k]) << ',' << to_string(c.check) << ','
          << format_double(c.residuals[k]) << '\n';
    }
  }
}

void emit_report(const RunReport& report, ReportFormat format,
                 const std::filesystem::path& destination) {
  std::ofstream out(destination);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + destination.string() + "'");
  emit_report(report, format, out);
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write to '" + destination.string() + "' failed");
}

}  // namespace bt::cli
