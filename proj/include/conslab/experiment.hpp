#pragma once

// Configuration-driven experiments: each writes CSV artifacts (the source of
// truth), optional SVG charts and report.json into its output directory.

#include "conslab/analysis.hpp"
#include "conslab/config.hpp"
#include "conslab/csv.hpp"
#include "conslab/dynamics.hpp"
#include "conslab/manet.hpp"
#include "conslab/plot.hpp"
#include "conslab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace conslab::cli {

namespace fs = std::filesystem;

struct AnalysisRow {
  std::string experiment_id;
  std::string quantity;
  double value = 0.0;
  std::optional<double> stderr_value;
  std::optional<bool> holds;
};

struct CheckOutcome {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

struct ExperimentReport {
  std::string name;
  ExperimentKind kind = ExperimentKind::protocol_run;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  fs::path output_dir;
  std::vector<fs::path> csv_files;
  std::vector<fs::path> svg_files;
  std::vector<AnalysisRow> rows;
  std::vector<CheckOutcome> checks;
  std::optional<RateFit> fit;

  [[nodiscard]] std::vector<const CheckOutcome*> failed_checks() const {
    std::vector<const CheckOutcome*> out;
    for (const auto& c : checks)
      if (!c.holds) out.push_back(&c);
    return out;
  }

  [[nodiscard]] json to_json() const {
    json j;
    j["name"] = name;
    j["experiment"] = to_string(kind);
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    j["csv"] = json::array();
    for (const auto& p : csv_files) j["csv"].push_back(p.filename().string());
    j["svg"] = json::array();
    for (const auto& p : svg_files) j["svg"].push_back(p.filename().string());
    j["analysis"] = json::array();
    for (const auto& r : rows) {
      json row{{"experiment_id", r.experiment_id}, {"quantity", r.quantity}, {"value", r.value}, {"source", "analysis.csv"}};
      if (r.stderr_value) row["stderr"] = *r.stderr_value;
      if (r.holds) row["holds"] = *r.holds;
      j["analysis"].push_back(std::move(row));
    }
    j["checks"] = json::array();
    for (const auto& c : checks)
      j["checks"].push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"holds", c.holds}, {"source", "analysis.csv"}});
    if (fit) j["fit"] = {{"slope", fit->slope}, {"stderr", fit->stderr_slope}, {"intercept", fit->intercept}};
    return j;
  }
};

// Default artifact root: $CONSLAB_OUT_DIR, else ./out.
[[nodiscard]] inline fs::path default_output_root() {
  if (const char* env = std::getenv("CONSLAB_OUT_DIR"); env && *env) return env;
  return "out";
}

[[nodiscard]] inline fs::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return default_output_root() / cfg.name;
}

namespace detail {

class Session {
 public:
  Session(const ExperimentConfig& cfg, ExperimentReport& report) : cfg_(cfg), report_(report) {
    report_.name = cfg.name;
    report_.kind = cfg.kind;
    report_.config_hash = cfg.config_hash;
    report_.seed = cfg.seed;
    report_.output_dir = resolve_output_dir(cfg);
    fs::create_directories(report_.output_dir);
  }

  CsvWriter csv(const std::string& file, const std::vector<std::string>& header) {
    const auto path = report_.output_dir / file;
    report_.csv_files.push_back(path);
    return CsvWriter(path, header, cfg_.config_hash, cfg_.seed);
  }

  void plot(const std::string& csv_file, PlotKind kind, const std::string& svg_file) {
    if (!cfg_.plots) return;
    const auto svg = report_.output_dir / svg_file;
    emit_plot(report_.output_dir / csv_file, kind, svg);
    report_.svg_files.push_back(svg);
  }

  void row(const std::string& quantity, double value, std::optional<double> se = std::nullopt, std::optional<bool> holds = std::nullopt) {
    report_.rows.push_back({cfg_.name, quantity, value, se, holds});
  }

  void check(const std::string& name, double lhs, double rhs, bool holds) { report_.checks.push_back({name, lhs, rhs, holds}); }

  // analysis.csv: summary rows, then each check as <name>.lhs / <name>.rhs.
  void write_analysis() {
    auto w = csv("analysis.csv", {"experiment_id", "quantity", "value", "stderr", "holds"});
    for (const auto& r : report_.rows) {
      w.cell(r.experiment_id).cell(r.quantity).cell(r.value);
      r.stderr_value ? w.cell(*r.stderr_value) : w.blank();
      r.holds ? w.cell(*r.holds ? "true" : "false") : w.blank();
      w.end_row();
    }
    for (const auto& c : report_.checks)
      for (const auto& [suffix, v] : {std::pair{".lhs", c.lhs}, std::pair{".rhs", c.rhs}}) {
        w.cell(cfg_.name).cell(c.name + suffix).cell(v).blank().cell(c.holds ? "true" : "false");
        w.end_row();
      }
  }

 private:
  const ExperimentConfig& cfg_;
  ExperimentReport& report_;
};

inline std::vector<std::string> state_header(int n, std::string_view first) {
  std::vector<std::string> h{std::string(first)};
  for (int i = 1; i <= n; ++i) h.push_back("x_" + std::to_string(i));
  h.push_back("V");
  h.push_back("a");
  return h;
}

// Rows t0, t0+1, ... of x, V and the gain applied at that step (blank after the last).
inline void write_states(CsvWriter& w, const SimulationTrace& tr, std::int64_t t0) {
  for (std::size_t k = 0; k < tr.states.size(); ++k) {
    w.cell(t0 + static_cast<std::int64_t>(k));
    for (Eigen::Index i = 0; i < tr.states[k].size(); ++i) w.cell(tr.states[k](i));
    w.cell(tr.disagreement[k]);
    k < tr.gains.size() ? w.cell(tr.gains[k]) : w.blank();
    w.end_row();
  }
}

inline void write_mean_v(CsvWriter& w, const std::vector<double>& mean, const std::vector<double>& se, std::int64_t replicas,
                         std::int64_t t0) {
  for (std::size_t k = 0; k < mean.size(); ++k) {
    w.cell(t0 + static_cast<std::int64_t>(k)).cell(mean[k]).cell(se[k]).cell(replicas);
    w.end_row();
  }
}

// The configured window clipped to [1, horizon]; the default window when the
// clipped one keeps fewer than the minimum number of fit points.
inline std::pair<double, double> fit_window(const ExperimentConfig& cfg) {
  const auto h = static_cast<double>(cfg.horizon);
  if (cfg.analysis.fit_window) {
    const auto [lo, hi] = *cfg.analysis.fit_window;
    const double clo = std::max(lo, 1.0), chi = std::min(hi, h);
    if (chi - std::ceil(clo) + 1.0 >= static_cast<double>(kMinFitPoints)) return {clo, chi};
  }
  return default_fit_window(cfg.horizon);
}

inline void protocol_run(const ExperimentConfig& cfg, Session& s) {
  const auto process = cfg.build_process();
  const auto tr = run(process, cfg.gains, cfg.noise, cfg.x1, cfg.horizon, cfg.seed);
  {
    auto w = s.csv("trace.csv", state_header(process.n(), "t"));
    write_states(w, tr, 1);
  }
  s.row("initial_average", cfg.x1.mean());
  s.row("final_average", tr.final_average);
  s.row("final_V", tr.disagreement.back());
  s.plot("trace.csv", PlotKind::states, "states.svg");
  s.plot("trace.csv", PlotKind::loglog_V, "loglog_V.svg");
}

struct MonteCarloOutcome {
  MonteCarloSummary summary;
  std::optional<RateFit> fit;
};

inline MonteCarloOutcome monte_carlo_study(const ExperimentConfig& cfg, Session& s, bool fit_rate_too) {
  const auto process = cfg.build_process();
  MonteCarloConfig mc{process, cfg.gains, cfg.noise, cfg.x1, cfg.horizon};
  MonteCarloOutcome out{monte_carlo(mc, cfg.replicas, cfg.seed), std::nullopt};
  const auto& sum = out.summary;
  {
    auto w = s.csv("mc.csv", {"t", "meanV", "stderrV", "replicas"});
    write_mean_v(w, sum.mean_v, sum.stderr_v, cfg.replicas, 1);
  }
  if (process.is_deterministic() && cfg.noise.uncorrelated_in_time()) {
    const auto exact = exact_second_moment(process, cfg.gains, cfg.noise, cfg.x1, cfg.horizon);
    auto w = s.csv("exact.csv", {"t", "exactV"});
    double worst_z = 0.0;
    for (std::size_t k = 0; k < exact.size(); ++k) {
      w.cell(static_cast<std::int64_t>(k + 1)).cell(exact[k]);
      w.end_row();
      // Deterministic points carry only rounding-level spread.
      if (sum.stderr_v[k] > 1e-12 * std::max(1.0, exact[k])) worst_z = std::max(worst_z, std::abs(sum.mean_v[k] - exact[k]) / sum.stderr_v[k]);
    }
    s.row("exact_final_V", exact.back());
    s.row("max_abs_z_mc_vs_exact", worst_z);
  }
  const auto stats = consensus_stats(sum.final_states, cfg.x1);
  s.row("target_average", stats.target_average);
  s.row("mean_final_average", stats.mean_final, stats.standard_error());
  s.row("var_final_average", stats.var_final);
  s.row("mean_final_V", sum.mean_v.back(), sum.stderr_v.back());

  if (fit_rate_too) {
    const auto window = fit_window(cfg);
    const auto fit = fit_rate(sum.mean_v, window);
    out.fit = fit;
    s.row("slope", fit.slope, fit.stderr_slope);
    s.row("intercept", fit.intercept);
    s.row("fit_points", static_cast<double>(fit.points));
    const auto cmp = compare_inverse_log(sum.mean_v, window);
    s.row("rss_power", cmp.rss_power);
    s.row("rss_inverse_log", cmp.rss_inverse_log);
    std::optional<double> expected = cfg.analysis.expected_slope;
    if (!expected && cfg.kind == ExperimentKind::adversarial_study && cfg.topology.delta < 0.5)
      expected = -(1.0 - 2.0 * cfg.topology.delta);
    if (expected) {
      const double tol = cfg.analysis.slope_tolerance;
      s.row("expected_slope", *expected);
      s.check("slope_within_tolerance", std::abs(fit.slope - *expected), tol, std::abs(fit.slope - *expected) <= tol);
    }
    if (cfg.analysis.slope_at_most)
      s.check("slope_at_most", fit.slope, *cfg.analysis.slope_at_most, fit.slope <= *cfg.analysis.slope_at_most);
  }
  if (cfg.kind == ExperimentKind::random_topology_study) {
    const double gap = std::abs(stats.mean_final - stats.target_average), bound = 4.0 * stats.standard_error();
    s.check("final_average_unbiased", gap, bound, gap <= bound);
  }
  s.plot("mc.csv", PlotKind::loglog_V, "loglog_V.svg");
  return out;
}

inline std::uint64_t derived_seed(std::uint64_t seed, StreamTag tag, std::uint64_t k) { return StreamKey(seed).derive(tag).derive(k).raw(); }

inline std::optional<RateFit> manet_study(const ExperimentConfig& cfg, Session& s) {
  const auto& scene = *cfg.scene;
  const auto R = cfg.replicas;
  const auto L = cfg.horizon;
  std::vector<manet::ManetRun> runs(static_cast<std::size_t>(R));
  const std::int64_t csize = std::max<std::int64_t>(1, (R + 15) / 16);
  conslab::detail::for_each_chunk((R + csize - 1) / csize, [&](std::int64_t c) {
    for (std::int64_t r = c * csize; r < std::min(R, (c + 1) * csize); ++r) {
      manet::ManetRunOptions opts{r == 0, false, r == 0};
      runs[static_cast<std::size_t>(r)] = manet::run_manet(scene, cfg.gains, L, derived_seed(cfg.seed, StreamTag::replica, static_cast<std::uint64_t>(r)), opts);
    }
  });

  {
    auto w = s.csv("trace.csv", state_header(scene.n, "t"));
    write_states(w, runs.front().trace, 0);
  }
  {
    auto w = s.csv("positions.csv", {"l", "agent", "px", "py"});
    const auto& pos = runs.front().positions;
    for (std::size_t l = 0; l < pos.size(); ++l)
      for (int i = 0; i < scene.n; ++i) {
        w.cell(static_cast<std::int64_t>(l)).cell(i + 1).cell(pos[l][static_cast<std::size_t>(i)].x()).cell(pos[l][static_cast<std::size_t>(i)].y());
        w.end_row();
      }
  }
  std::vector<double> finals, ranges;
  {
    auto w = s.csv("manet.csv", {"run", "seed", "final_average", "final_range"});
    for (std::int64_t r = 0; r < R; ++r) {
      const auto& run = runs[static_cast<std::size_t>(r)];
      finals.push_back(run.trace.final_average);
      ranges.push_back(run.final_range);
      w.cell(r).cell(std::to_string(derived_seed(cfg.seed, StreamTag::replica, static_cast<std::uint64_t>(r)))).cell(run.trace.final_average).cell(run.final_range);
      w.end_row();
    }
  }
  const auto len = static_cast<std::size_t>(L + 1);
  std::vector<double> mean(len, 0.0), se(len, 0.0);
  for (std::size_t k = 0; k < len; ++k) {
    double m = 0.0, m2 = 0.0;
    for (std::int64_t r = 0; r < R; ++r) {
      const double v = runs[static_cast<std::size_t>(r)].trace.disagreement[k];
      const double d = v - m;
      m += d / static_cast<double>(r + 1);
      m2 += d * (v - m);
    }
    mean[k] = m;
    se[k] = R > 1 ? std::sqrt(m2 / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
  }
  {
    auto w = s.csv("mc.csv", {"t", "meanV", "stderrV", "replicas"});
    write_mean_v(w, mean, se, R, 0);
  }

  double fm = 0.0, fv = 0.0;
  for (double f : finals) fm += f;
  fm /= static_cast<double>(R);
  for (double f : finals) fv += (f - fm) * (f - fm);
  const double fse = R > 1 ? std::sqrt(fv / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
  auto sorted = ranges;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.size() % 2 ? sorted[sorted.size() / 2] : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  const double below = static_cast<double>(std::count_if(ranges.begin(), ranges.end(), [](double v) { return v < 0.05; })) / static_cast<double>(R);
  s.row("initial_average", cfg.x1.mean());
  s.row("mean_final_average", fm, fse);
  s.row("median_final_range", median);
  s.row("fraction_final_range_below_0.05", below);

  std::optional<RateFit> fit;
  if (L >= 20) {
    std::vector<double> ts, ys;
    for (std::size_t k = 1; k < len; ++k) ts.push_back(static_cast<double>(k)), ys.push_back(mean[k]);
    const auto window = fit_window(cfg);
    try {
      fit = fit_rate(ts, ys, window);
      s.row("slope", fit->slope, fit->stderr_slope);
    } catch (const std::exception&) {
      fit.reset();
    }
  }
  if (cfg.analysis.final_mean_band) {
    const auto [lo, hi] = *cfg.analysis.final_mean_band;
    s.check("final_mean_in_band", fm, fm < lo ? lo : hi, fm >= lo && fm <= hi);
  }
  s.plot("trace.csv", PlotKind::states, "states.svg");
  s.plot("mc.csv", PlotKind::loglog_V, "loglog_V.svg");
  s.plot("positions.csv", PlotKind::positions, "positions.svg");
  return fit;
}

inline void verify_suite(const ExperimentConfig& cfg, Session& s) {
  for (const auto& name : cfg.verify.suites) {
    const auto o = verify::run_suite(name, cfg.verify.cases, cfg.seed);
    s.row(name + ".cases", o.cases);
    s.row(name + ".failures", o.failures, std::nullopt, o.passed());
    s.check(name, o.worst_ratio, 1.0, o.passed());
  }
}

}  // namespace detail

[[nodiscard]] inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  detail::Session s(cfg, report);
  switch (cfg.kind) {
    case ExperimentKind::protocol_run: detail::protocol_run(cfg, s); break;
    case ExperimentKind::monte_carlo: (void)detail::monte_carlo_study(cfg, s, false); break;
    case ExperimentKind::rate_study:
    case ExperimentKind::adversarial_study:
    case ExperimentKind::random_topology_study: report.fit = detail::monte_carlo_study(cfg, s, true).fit; break;
    case ExperimentKind::manet_study: report.fit = detail::manet_study(cfg, s); break;
    case ExperimentKind::verify_suite: detail::verify_suite(cfg, s); break;
  }
  s.write_analysis();
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(report.output_dir / "report.json") << report.to_json().dump(2) << '\n';
  return report;
}

struct SweepResult {
  ExperimentReport summary;  // sweep.csv and the merged analysis rows
  std::vector<ExperimentReport> points;
};

// One experiment per value of `parameter` (a dotted config path). Point 0
// keeps the configured seed, point k > 0 uses a seed derived from it; each
// point writes into <out>/point_<k>.
[[nodiscard]] inline SweepResult sweep(const json& base_doc, const std::string& parameter, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("values", "sweep needs at least one value");
  if (!has_parameter(base_doc, parameter)) {
    const auto preset = parameter.rfind("scene.", 0) == 0 && has_parameter(base_doc, "scene.preset");
    if (!preset) throw ConfigError(parameter, "sweep parameter does not exist in the configuration");
  }
  const auto base = parse_config(base_doc);
  const fs::path root = resolve_output_dir(base);
  SweepResult out;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < values.size(); ++k) {
    json doc = base_doc;
    set_parameter(doc, parameter, values[k]);
    doc["seed"] = k == 0 ? base.seed : detail::derived_seed(base.seed, StreamTag::sweep_point, k);
    doc["output_dir"] = (root / ("point_" + std::to_string(k))).string();
    doc["name"] = base.name + "@" + parameter + "=" + format_number(values[k]);
    out.points.push_back(run_experiment(parse_config(doc)));
  }

  auto& sum = out.summary;
  sum.name = base.name;
  sum.kind = base.kind;
  sum.config_hash = base.config_hash;
  sum.seed = base.seed;
  sum.output_dir = root;
  fs::create_directories(root);
  {
    const auto path = root / "sweep.csv";
    sum.csv_files.push_back(path);
    CsvWriter w(path, {"value", "slope", "stderr"}, base.config_hash, base.seed);
    for (std::size_t k = 0; k < values.size(); ++k) {
      const auto& f = out.points[k].fit;
      w.cell(values[k]);
      f ? w.cell(f->slope) : w.blank();
      f ? w.cell(f->stderr_slope) : w.blank();
      w.end_row();
    }
  }
  {
    const auto path = root / "analysis.csv";
    sum.csv_files.push_back(path);
    CsvWriter w(path, {"experiment_id", "quantity", "value", "stderr", "holds"}, base.config_hash, base.seed);
    for (const auto& p : out.points) {
      for (const auto& r : p.rows) {
        sum.rows.push_back(r);
        w.cell(r.experiment_id).cell(r.quantity).cell(r.value);
        r.stderr_value ? w.cell(*r.stderr_value) : w.blank();
        r.holds ? w.cell(*r.holds ? "true" : "false") : w.blank();
        w.end_row();
      }
      for (const auto& c : p.checks) {
        sum.checks.push_back(c);
        for (const auto& [suffix, v] : {std::pair{".lhs", c.lhs}, std::pair{".rhs", c.rhs}}) {
          w.cell(p.name).cell(c.name + suffix).cell(v).blank().cell(c.holds ? "true" : "false");
          w.end_row();
        }
      }
    }
  }
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json j = sum.to_json();
  j["parameter"] = parameter;
  j["values"] = values;
  j["points"] = json::array();
  for (const auto& p : out.points) j["points"].push_back(p.output_dir.filename().string());
  std::ofstream(root / "report.json") << j.dump(2) << '\n';
  return out;
}

}  // namespace conslab::cli
