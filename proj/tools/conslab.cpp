// conslab: run, sweep, verify and plot consensus experiments.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error,
// 3 verification failure.

#include "conslab/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace conslab::cli;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerification = 3;

void print_report(const ExperimentReport& r) {
  std::cout << r.name << " (" << to_string(r.kind) << ") -> " << r.output_dir.string() << "\n";
  std::cout << "  config_hash=" << r.config_hash << " seed=" << r.seed << "\n";
  for (const auto& row : r.rows) {
    std::cout << "  " << row.quantity << " = " << format_number(row.value);
    if (row.stderr_value) std::cout << " +- " << format_number(*row.stderr_value);
    std::cout << "\n";
  }
  for (const auto& c : r.checks)
    std::cout << "  check " << c.name << ": " << (c.holds ? "pass" : "FAIL") << " (lhs " << format_number(c.lhs) << ", rhs "
              << format_number(c.rhs) << ")\n";
}

int verification_exit(const ExperimentReport& r) {
  const auto failed = r.failed_checks();
  if (failed.empty()) return 0;
  std::cerr << "verification failed:";
  for (const auto* c : failed) std::cerr << ' ' << c->name;
  std::cerr << '\n';
  return kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consensus experiments under noisy, time-varying topologies"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides overrides;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0, replicas = 0;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Override the configured seed");
  auto* horizon_opt = app.add_option("--horizon", horizon, "Override the configured horizon")->check(CLI::PositiveNumber);
  auto* replicas_opt = app.add_option("--replicas", replicas, "Override the configured replica count")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out-dir", out_dir, "Output directory (default $CONSLAB_OUT_DIR/<name> or out/<name>)");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a configuration file");
  run_cmd->add_option("config", config_path, "Configuration file (JSON)")->required();

  std::string parameter;
  std::vector<double> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sweep_cmd->add_option("config", config_path, "Configuration file (JSON)")->required();
  sweep_cmd->add_option("--param", parameter, "Dotted configuration path, e.g. topology.delta")->required();
  sweep_cmd->add_option("--values", values, "Parameter values")->required()->delimiter(',');

  std::optional<std::string> verify_config;
  int cases = 500;
  auto* verify_cmd = app.add_subcommand("verify", "Run the randomized property suites");
  verify_cmd->add_option("config", verify_config, "verify_suite configuration (optional)");
  auto* cases_opt = verify_cmd->add_option("--cases", cases, "Cases per suite")->check(CLI::PositiveNumber);

  std::string csv_path, kind_name, svg_path;
  auto* plot_cmd = app.add_subcommand("plot", "Render an SVG chart from a CSV artifact");
  plot_cmd->add_option("csv", csv_path, "Input CSV")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--kind", kind_name, "loglog_V, states or positions")
      ->required()
      ->check(CLI::IsMember({"loglog_V", "states", "positions"}));
  plot_cmd->add_option("-o,--output", svg_path, "Output SVG (default: CSV path with .svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*seed_opt) overrides.seed = seed;
  if (*horizon_opt) overrides.horizon = horizon;
  if (*replicas_opt) overrides.replicas = replicas;
  if (*out_opt) overrides.output_dir = out_dir;

  try {
    if (*run_cmd) {
      const auto cfg = load_config(config_path, overrides);
      const auto report = run_experiment(cfg);
      print_report(report);
      return cfg.kind == ExperimentKind::verify_suite ? verification_exit(report) : 0;
    }
    if (*sweep_cmd) {
      json doc = read_json_file(config_path);
      apply_overrides(doc, overrides);
      const auto result = sweep(doc, parameter, values);
      for (const auto& p : result.points) print_report(p);
      std::cout << "sweep -> " << (result.summary.output_dir / "sweep.csv").string() << "\n";
      return 0;
    }
    if (*verify_cmd) {
      json doc = verify_config ? read_json_file(*verify_config) : json{{"experiment", "verify_suite"}, {"name", "verify"}};
      apply_overrides(doc, overrides);
      if (*cases_opt) doc["verify"]["cases"] = cases;
      const auto cfg = parse_config(doc);
      if (cfg.kind != ExperimentKind::verify_suite) throw ConfigError("experiment", "verify expects a verify_suite configuration");
      const auto report = run_experiment(cfg);
      print_report(report);
      return verification_exit(report);
    }
    if (*plot_cmd) {
      const auto kind = *plot_kind_named(kind_name);
      std::filesystem::path out = svg_path.empty() ? std::filesystem::path(csv_path).replace_extension(".svg") : std::filesystem::path(svg_path);
      emit_plot(csv_path, kind, out);
      std::cout << out.string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return *plot_cmd ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
