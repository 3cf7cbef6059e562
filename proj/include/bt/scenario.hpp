#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bt/derivation.hpp"
#include "bt/pathfield.hpp"

namespace bt::cli {

using Json = nlohmann::ordered_json;

enum class ScenarioKind { custom, sphere_latitude, exponential_diagonal, signature_probe };
enum class CheckKind { consistency, compatibility, invariant_gram, holonomy, norm_drift, existence };
enum class TransportSource { none, frame, coefficients, generate_frame, generate_coefficients };
enum class ReportFormat { json, csv };

std::string_view to_string(ScenarioKind kind) noexcept;
std::string_view to_string(CheckKind kind) noexcept;
std::optional<ScenarioKind> scenario_kind_from_string(std::string_view name) noexcept;
std::optional<CheckKind> check_kind_from_string(std::string_view name) noexcept;
std::optional<ReportFormat> report_format_from_string(std::string_view name) noexcept;

/// Loaded (but not yet validated as metrics or frames) inputs of one scenario.
template <Scalar T>
struct ScenarioInputs {
  using value_type = T;
  std::optional<MatrixField<T>> metric;
  std::optional<MatrixField<T>> frame;
  std::optional<MatrixField<double>> coefficients;
  std::vector<Matrix<T>> points;  // signature-probe only
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::custom;
  std::vector<CheckKind> checks;
  double tolerance = kDefaultTol;
  std::size_t substeps = 8;
  TransportSource transport = TransportSource::none;
  double colatitude = 0.0;          // sphere-latitude only
  double holonomy_tolerance = 1e-6;  // sphere-latitude only
  std::variant<ScenarioInputs<double>, ScenarioInputs<Complex>> inputs;
  /// The config with defaults filled in and the resolved tolerance.
  Json config;
};

struct ScenarioOptions {
  std::optional<double> tolerance_override;  // --tol
  std::optional<std::string> env_tolerance;  // BT_TOL
  std::filesystem::path base_dir;            // resolves relative CSV paths
};

/// Precedence: override, then config, then env, then kDefaultTol.
double resolve_tolerance(const std::optional<double>& override_value,
                         const std::optional<double>& config_value,
                         const std::optional<std::string>& env_value);

/// Validates a config document and loads every CSV it references.
/// Unknown keys, missing required keys and inconsistent shapes raise
/// ValidationError.
Scenario parse_scenario(const Json& doc, const ScenarioOptions& options = {});
/// As above from JSON text; malformed JSON raises ParseError.
Scenario parse_scenario_text(std::string_view text, const ScenarioOptions& options = {});
/// Reads the file (IoError) and resolves CSV paths next to it.
Scenario load_scenario(const std::filesystem::path& path, ScenarioOptions options = {});

/// Config for the built-in sphere-latitude scenario with every check that
/// applies to it.
Json sphere_config(double colatitude, std::size_t steps);

struct CheckError {
  std::string kind;
  std::string message;
  friend bool operator==(const CheckError&, const CheckError&) = default;
};

struct CheckResult {
  CheckKind check = CheckKind::consistency;
  bool verdict = false;
  std::optional<double> max_residual;
  std::optional<double> tolerance;
  std::vector<double> residuals;  // one per grid sample, or empty
  Json outputs = Json::object();
  std::optional<CheckError> error;
  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

struct RunReport {
  Json config;
  std::vector<double> grid;
  std::vector<CheckResult> checks;  // in request order, each exactly once
  double wall_time_seconds = 0.0;

  /// 2 if any check hit an error, else 1 if any verdict is false, else 0.
  int exit_code() const noexcept;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Module errors are caught per check and recorded in the report.
RunReport run_scenario(const Scenario& scenario);
/// Runs independent scenarios concurrently; results keep input order.
std::vector<RunReport> run_batch(std::span<const Scenario> scenarios);

Json report_to_json(const RunReport& report);
RunReport report_from_json(const Json& doc);

/// JSON: the full report. CSV: `s,check,residual` rows for every check
/// that produced per-sample residuals.
void emit_report(const RunReport& report, ReportFormat format, std::ostream& out);
/// IoError when the destination cannot be written.
void emit_report(const RunReport& report, ReportFormat format,
                 const std::filesystem::path& destination);

}  // namespace bt::cli
