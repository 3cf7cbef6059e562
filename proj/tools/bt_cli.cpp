#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bt/scenario.hpp"

namespace {

using namespace bt::cli;

std::optional<std::string> env_tolerance() {
  if (const char* v = std::getenv("BT_TOL")) return std::string(v);
  return std::nullopt;
}

struct OutputOptions {
  std::string format = "json";
  std::string out;
  std::string csv;
};

int finish(const RunReport& report, const OutputOptions& opts) {
  const auto format = report_format_from_string(opts.format).value_or(ReportFormat::json);
  emit_report(report, format, std::cout);
  if (!opts.out.empty()) emit_report(report, ReportFormat::json, std::filesystem::path(opts.out));
  if (!opts.csv.empty()) emit_report(report, ReportFormat::csv, std::filesystem::path(opts.csv));
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency checks for linear transports and bundle metrics along paths",
               "bundle-transport"};
  app.require_subcommand(1);
  app.fallthrough();

  OutputOptions output;
  std::optional<double> tol;
  app.add_option("--tol", tol, "Relative tolerance (overrides the config and BT_TOL)");
  app.add_option("--out", output.out, "Also write the JSON report to this file");
  app.add_option("--csv", output.csv, "Also write per-sample residuals as CSV to this file");
  app.add_option("--format", output.format, "Format printed to stdout")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* run = app.add_subcommand("run", "Run a scenario described by a JSON config");
  std::string config_path;
  run->add_option("config", config_path, "Scenario config (JSON)")->required();

  auto* sphere = app.add_subcommand("sphere", "Latitude-circle transport on the unit sphere");
  double colatitude = std::numbers::pi / 3.0;
  std::size_t steps = 10000;
  sphere->add_option("--colatitude", colatitude, "Colatitude θ₀ in radians")
      ->capture_default_str();
  sphere->add_option("--steps", steps, "Grid intervals around the loop")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ScenarioOptions options{tol, env_tolerance(), {}};
    const Scenario scenario = run->parsed()
                                  ? load_scenario(config_path, options)
                                  : parse_scenario(sphere_config(colatitude, steps), options);
    return finish(run_scenario(scenario), output);
  } catch (const bt::Error& e) {
    std::cerr << "error: " << bt::to_string(e.kind()) << ": " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return 2;
}
