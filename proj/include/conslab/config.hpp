#pragma once

// JSON experiment configuration. Field paths in errors use dots and [k], for
// example "topology.graph.edges[2]".

#include "conslab/dynamics.hpp"
#include "conslab/gain.hpp"
#include "conslab/graph.hpp"
#include "conslab/manet.hpp"
#include "conslab/noise.hpp"
#include "conslab/topology.hpp"
#include "conslab/verify.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conslab::cli {

using json = nlohmann::json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ExperimentKind {
  protocol_run,
  monte_carlo,
  rate_study,
  adversarial_study,
  random_topology_study,
  manet_study,
  verify_suite
};

inline constexpr std::pair<ExperimentKind, std::string_view> kExperimentNames[] = {
    {ExperimentKind::protocol_run, "protocol_run"},
    {ExperimentKind::monte_carlo, "monte_carlo"},
    {ExperimentKind::rate_study, "rate_study"},
    {ExperimentKind::adversarial_study, "adversarial_study"},
    {ExperimentKind::random_topology_study, "random_topology_study"},
    {ExperimentKind::manet_study, "manet_study"},
    {ExperimentKind::verify_suite, "verify_suite"},
};

inline std::string to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kExperimentNames)
    if (kind == k) return std::string(name);
  return "unknown";
}

// 64-bit FNV-1a.
[[nodiscard]] inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[nodiscard]] inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct TopologyConfig {
  ProcessKind kind = ProcessKind::fixed;
  std::vector<WeightedDigraph> graphs;
  int period = 1;
  int n = 0;
  double delta = 0.0;
  double c = 1.0;
  int block_length = 1;
  double mu = 0.25;
  double p = 1.0;
  std::uint64_t seed = 0;
};

struct AnalysisConfig {
  std::optional<std::pair<double, double>> fit_window;
  std::optional<double> expected_slope;
  double slope_tolerance = 0.15;
  std::optional<double> slope_at_most;
  std::optional<std::pair<double, double>> final_mean_band;
};

struct VerifyConfig {
  std::vector<std::string> suites{"lemma1", "lemma4", "lemma6", "proposition1", "doubly_stochastic"};
  int cases = 500;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::protocol_run;
  std::string name;
  std::uint64_t seed = 0;
  std::int64_t horizon = 0;
  std::int64_t replicas = 1;
  std::string output_dir;
  Vector x1;
  TopologyConfig topology;
  GainSchedule gains;
  NoiseModel noise;
  AnalysisConfig analysis;
  std::optional<manet::ManetScene> scene;
  VerifyConfig verify;
  bool plots = true;
  std::string config_hash;
  json source;  // effective document after overrides

  [[nodiscard]] TopologyProcess build_process() const;
};

namespace detail {

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}
inline std::string index(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

inline const json& require(const json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(std::string(key));
  if (it == obj.end()) throw ConfigError(join(path, key), "required field is missing");
  return *it;
}

inline const json* find(const json& obj, std::string_view key) {
  if (!obj.is_object()) return nullptr;
  auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

inline std::int64_t as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::uint64_t as_unsigned(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  const auto s = as_integer(v, path);
  if (s < 0) throw ConfigError(path, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(s);
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

inline double number(const json& obj, std::string_view key, const std::string& path) {
  return as_number(require(obj, key, path), join(path, key));
}
inline double number_or(const json& obj, std::string_view key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  return v ? as_number(*v, join(path, key)) : fallback;
}
inline std::int64_t integer(const json& obj, std::string_view key, const std::string& path) {
  return as_integer(require(obj, key, path), join(path, key));
}
inline std::int64_t integer_or(const json& obj, std::string_view key, const std::string& path, std::int64_t fallback) {
  const json* v = find(obj, key);
  return v ? as_integer(*v, join(path, key)) : fallback;
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(as_number(v[k], index(path, k)));
  return out;
}

template <typename Body>
auto guarded(const std::string& path, Body&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

// {"n": 4, "shape": "complete" | "pair" | "cycle" | "path" | "empty"} or
// {"n": 4, "a_max": 2, "undirected": false, "edges": [[from, to, weight], ...]}
// with 1-based agents and an edge j -> i written [j, i].
inline WeightedDigraph parse_graph(const json& g, const std::string& path) {
  const auto n = integer(g, "n", path);
  if (n < 1) throw ConfigError(join(path, "n"), "must be >= 1");
  const int ni = static_cast<int>(n);
  if (const json* shape = find(g, "shape")) {
    const auto s = as_string(*shape, join(path, "shape"));
    if (s == "complete") return canonical_graph(ni, CanonicalKind::complete_G1);
    if (s == "pair") return canonical_graph(ni, CanonicalKind::pair_G2);
    if (s == "empty") return WeightedDigraph(ni, 1.0);
    if (s == "cycle" || s == "path") {
      Matrix w = Matrix::Zero(ni, ni);
      const int links = s == "cycle" ? (ni == 2 ? 1 : ni) : ni - 1;
      for (int k = 0; k < links; ++k) w(k, (k + 1) % ni) = w((k + 1) % ni, k) = 1.0;
      return WeightedDigraph(std::move(w), 1.0);
    }
    throw ConfigError(join(path, "shape"), "unknown shape '" + s + "'");
  }
  const double a_max = number_or(g, "a_max", path, 1.0);
  const json* undirected = find(g, "undirected");
  const bool sym = undirected && undirected->is_boolean() && undirected->get<bool>();
  const json& edges = require(g, "edges", path);
  if (!edges.is_array()) throw ConfigError(join(path, "edges"), "expected an array");
  std::vector<Edge> list;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto ep = index(join(path, "edges"), k);
    const auto e = numbers(edges[k], ep);
    if (e.size() < 2 || e.size() > 3) throw ConfigError(ep, "expected [from, to] or [from, to, weight]");
    const int from = static_cast<int>(e[0]) - 1, to = static_cast<int>(e[1]) - 1;
    if (from < 0 || to < 0 || from >= ni || to >= ni || from == to || e[0] != std::floor(e[0]) || e[1] != std::floor(e[1]))
      throw ConfigError(ep, "agents must be distinct integers in 1.." + std::to_string(n));
    const double w = e.size() == 3 ? e[2] : 1.0;
    list.push_back({from, to, w});
    if (sym) list.push_back({to, from, w});
  }
  return guarded(path, [&] { return WeightedDigraph::from_edges(ni, a_max, list); });
}

inline ProcessKind parse_process_kind(const json& v, const std::string& path) {
  const auto s = as_string(v, path);
  for (auto k : {ProcessKind::fixed, ProcessKind::periodic, ProcessKind::extensible_block, ProcessKind::adversarial,
                 ProcessKind::random_A1prime})
    if (to_string(k) == s) return k;
  throw ConfigError(path, "unknown topology kind '" + s + "'");
}

inline TopologyConfig parse_topology(const json& t, const std::string& path, std::uint64_t seed) {
  TopologyConfig out;
  out.kind = parse_process_kind(require(t, "kind", path), join(path, "kind"));
  switch (out.kind) {
    case ProcessKind::fixed:
      out.graphs.push_back(parse_graph(require(t, "graph", path), join(path, "graph")));
      break;
    case ProcessKind::periodic: {
      const json& comps = require(t, "components", path);
      if (!comps.is_array() || comps.empty()) throw ConfigError(join(path, "components"), "expected a nonempty array");
      for (std::size_t k = 0; k < comps.size(); ++k) out.graphs.push_back(parse_graph(comps[k], index(join(path, "components"), k)));
      out.period = static_cast<int>(integer_or(t, "period", path, static_cast<std::int64_t>(comps.size())));
      break;
    }
    case ProcessKind::extensible_block:
      out.graphs.push_back(parse_graph(require(t, "graph", path), join(path, "graph")));
      out.delta = number(t, "delta", path);
      out.c = number_or(t, "c", path, 1.0);
      break;
    case ProcessKind::adversarial:
      out.n = static_cast<int>(integer(t, "n", path));
      out.delta = number(t, "delta", path);
      out.c = number_or(t, "c", path, 1.0);
      break;
    case ProcessKind::random_A1prime:
      out.n = static_cast<int>(integer(t, "n", path));
      out.block_length = static_cast<int>(integer(t, "K", path));
      out.mu = number(t, "mu", path);
      out.p = number(t, "p", path);
      break;
  }
  if (!out.graphs.empty()) out.n = out.graphs.front().n();
  if (out.n < 2) throw ConfigError(join(path, "n"), "need at least 2 agents");
  const json* s = find(t, "seed");
  out.seed = s ? as_unsigned(*s, join(path, "seed")) : StreamKey(seed).derive(StreamTag::topology).raw();
  return out;
}

// Gains: {"kind": "constant", "value"} | {"kind": "power", "alpha", "exponent", "t_star", "shift"}
// | {"kind": "log_corrected", "alpha", "t_star"} | {"kind": "table", "values"}
// | {"kind": "theorem1", "c", "delta"} with n, a_max and (by default) delta
// taken from the topology.
inline GainSchedule parse_gains(const json& g, const std::string& path, int n, double a_max,
                                std::optional<double> topology_delta = std::nullopt) {
  const auto kind = as_string(require(g, "kind", path), join(path, "kind"));
  return guarded(path, [&] {
    if (kind == "constant") return GainSchedule::constant(number(g, "value", path));
    if (kind == "power")
      return GainSchedule::power(number(g, "alpha", path), number(g, "exponent", path), number_or(g, "t_star", path, 0.0),
                                 number_or(g, "shift", path, 0.0));
    if (kind == "log_corrected") return GainSchedule::log_corrected(number(g, "alpha", path), number(g, "t_star", path));
    if (kind == "table") return GainSchedule::from_table(numbers(require(g, "values", path), join(path, "values")));
    if (kind == "theorem1") {
      const double delta = topology_delta && !find(g, "delta") ? *topology_delta : number(g, "delta", path);
      return theorem1_gain(n, number_or(g, "c", path, 1.0), a_max, delta);
    }
    throw ConfigError(join(path, "kind"), "unknown gain kind '" + kind + "'");
  });
}

// {"kind": "iid_gaussian", "variance": 1, "theta": [...], "kappa": 0.5}
inline NoiseModel parse_noise(const json& nz, const std::string& path) {
  const auto kind = as_string(require(nz, "kind", path), join(path, "kind"));
  NoiseKind k{};
  bool found = false;
  for (auto c : {NoiseKind::zero, NoiseKind::iid_gaussian, NoiseKind::iid_uniform, NoiseKind::m_dependent_ma,
                 NoiseKind::martingale_difference})
    if (to_string(c) == kind) {
      k = c;
      found = true;
    }
  if (!found) throw ConfigError(join(path, "kind"), "unknown noise kind '" + kind + "'");
  NoiseParams params;
  if (const json* th = find(nz, "theta")) params.theta = numbers(*th, join(path, "theta"));
  params.kappa = number_or(nz, "kappa", path, params.kappa);
  const double v = k == NoiseKind::zero ? 0.0 : number(nz, "variance", path);
  return guarded(path, [&] { return make_noise(k, v, params); });
}

inline std::optional<manet::Figure> figure_named(std::string_view s) {
  if (s == "fig2") return manet::Figure::fig2;
  if (s == "fig3") return manet::Figure::fig3;
  if (s == "fig4") return manet::Figure::fig4;
  return std::nullopt;
}

// {"preset": "fig2"} optionally followed by overriding fields, or a full scene:
// positions [[x, y], ...], headings (radians), speed {scale, offset, exponent},
// group_velocity [vx, vy], radio {alpha: number or list, beta, sigma},
// period, quantization_half_width, reception_noise_sd.
inline manet::ManetScene parse_scene(const json& s, const std::string& path, std::optional<GainSchedule>& preset_gains) {
  manet::ManetScene sc;
  if (const json* pr = find(s, "preset")) {
    const auto name = as_string(*pr, join(path, "preset"));
    const auto fig = figure_named(name);
    if (!fig) throw ConfigError(join(path, "preset"), "unknown scene preset '" + name + "'");
    auto scenario = manet::scenario_preset(*fig);
    sc = std::move(scenario.scene);
    preset_gains = scenario.gains;
  }
  if (const json* pos = find(s, "positions")) {
    const auto pp = join(path, "positions");
    if (!pos->is_array()) throw ConfigError(pp, "expected an array of [x, y]");
    sc.positions0.clear();
    for (std::size_t k = 0; k < pos->size(); ++k) {
      const auto xy = numbers((*pos)[k], index(pp, k));
      if (xy.size() != 2) throw ConfigError(index(pp, k), "expected [x, y]");
      sc.positions0.emplace_back(xy[0], xy[1]);
    }
    sc.n = static_cast<int>(sc.positions0.size());
  }
  if (const json* h = find(s, "headings")) sc.headings = numbers(*h, join(path, "headings"));
  if (const json* sp = find(s, "speed")) {
    const auto p = join(path, "speed");
    sc.speed_scale = number_or(*sp, "scale", p, sc.speed_scale);
    sc.speed_offset = number_or(*sp, "offset", p, sc.speed_offset);
    sc.speed_exponent = number_or(*sp, "exponent", p, sc.speed_exponent);
  }
  if (const json* gv = find(s, "group_velocity")) {
    const auto v = numbers(*gv, join(path, "group_velocity"));
    if (v.size() != 2) throw ConfigError(join(path, "group_velocity"), "expected [vx, vy]");
    sc.group_velocity = manet::Point(v[0], v[1]);
  }
  if (const json* r = find(s, "radio")) {
    const auto p = join(path, "radio");
    if (const json* a = find(*r, "alpha")) {
      if (a->is_number())
        sc.radio.alpha.assign(static_cast<std::size_t>(sc.n), a->get<double>());
      else
        sc.radio.alpha = numbers(*a, join(p, "alpha"));
    }
    sc.radio.beta = number_or(*r, "beta", p, sc.radio.beta);
    sc.radio.shadow_sigma = number_or(*r, "sigma", p, sc.radio.shadow_sigma);
  }
  sc.period = number_or(s, "period", path, sc.period);
  sc.quantization_half_width = number_or(s, "quantization_half_width", path, sc.quantization_half_width);
  sc.reception_noise_sd = number_or(s, "reception_noise_sd", path, sc.reception_noise_sd);
  if (sc.headings.empty()) sc.headings.assign(static_cast<std::size_t>(sc.n), 0.0);
  return sc;
}

}  // namespace detail

inline TopologyProcess ExperimentConfig::build_process() const {
  const auto& t = topology;
  switch (t.kind) {
    case ProcessKind::fixed: return TopologyProcess::fixed(t.graphs.front());
    case ProcessKind::periodic: return TopologyProcess::periodic(t.graphs, t.period);
    case ProcessKind::extensible_block: return TopologyProcess::extensible_block(t.graphs.front(), t.delta, t.c, horizon);
    case ProcessKind::adversarial: return TopologyProcess::adversarial(gains, t.delta, t.c, t.n, horizon);
    case ProcessKind::random_A1prime: return TopologyProcess::random_A1prime(t.block_length, t.mu, t.p, t.n, t.seed);
  }
  throw std::logic_error("unhandled topology kind");
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> horizon;
  std::optional<std::int64_t> replicas;
  std::optional<std::string> output_dir;
};

// Sets a dotted path ("topology.delta", "scene.speed.exponent") inside doc.
inline void set_parameter(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(dotted, "malformed parameter path");
    if (!node->is_object()) throw ConfigError(dotted.substr(0, start ? start - 1 : 0), "not an object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      if (value.is_number_float()) {
        const double v = value.get<double>();
        if (v == std::floor(v) && std::abs(v) < 1e15) (*node)[key] = static_cast<std::int64_t>(v);
      }
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

[[nodiscard]] inline bool has_parameter(const json& doc, const std::string& dotted) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const auto key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    const json* next = detail::find(*node, key);
    if (!next) return false;
    if (dot == std::string::npos) return true;
    node = next;
    start = dot + 1;
  }
}

inline void apply_overrides(json& doc, const Overrides& o) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  if (o.seed) doc["seed"] = *o.seed;
  if (o.horizon) doc["horizon"] = *o.horizon;
  if (o.replicas) doc["replicas"] = *o.replicas;
  if (o.output_dir) doc["output_dir"] = *o.output_dir;
}

// Parses an effective document (overrides already applied).
[[nodiscard]] inline ExperimentConfig parse_config(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  ExperimentConfig cfg;
  cfg.source = doc;
  json hashed = doc;
  hashed.erase("output_dir");
  cfg.config_hash = hex64(fnv1a(hashed.dump()));

  const auto kind = as_string(require(doc, "experiment", ""), "experiment");
  bool known = false;
  for (const auto& [k, name] : kExperimentNames)
    if (name == kind) {
      cfg.kind = k;
      known = true;
    }
  if (!known) throw ConfigError("experiment", "unknown experiment kind '" + kind + "'");

  cfg.name = find(doc, "name") ? as_string(doc["name"], "name") : kind;
  cfg.seed = find(doc, "seed") ? as_unsigned(doc["seed"], "seed") : 0;
  cfg.output_dir = find(doc, "output_dir") ? as_string(doc["output_dir"], "output_dir") : std::string();
  if (const json* p = find(doc, "plots")) {
    if (!p->is_boolean()) throw ConfigError("plots", "expected true or false");
    cfg.plots = p->get<bool>();
  }

  if (cfg.kind == ExperimentKind::verify_suite) {
    if (const json* v = find(doc, "verify")) {
      if (const json* s = find(*v, "suites")) {
        if (!s->is_array()) throw ConfigError("verify.suites", "expected an array of suite names");
        cfg.verify.suites.clear();
        for (std::size_t k = 0; k < s->size(); ++k) {
          const auto name = as_string((*s)[k], index("verify.suites", k));
          const auto& known_suites = verify::suite_names();
          if (std::find(known_suites.begin(), known_suites.end(), name) == known_suites.end())
            throw ConfigError(index("verify.suites", k), "unknown suite '" + name + "'");
          cfg.verify.suites.push_back(name);
        }
      }
      cfg.verify.cases = static_cast<int>(integer_or(*v, "cases", "verify", cfg.verify.cases));
      if (cfg.verify.cases < 1) throw ConfigError("verify.cases", "must be >= 1");
    }
    return cfg;
  }

  cfg.horizon = integer(doc, "horizon", "");
  if (cfg.horizon < 1) throw ConfigError("horizon", "must be >= 1");
  cfg.replicas = integer_or(doc, "replicas", "", 1);
  if (cfg.replicas < 1) throw ConfigError("replicas", "must be >= 1");
  if (cfg.kind == ExperimentKind::monte_carlo || cfg.kind == ExperimentKind::rate_study ||
      cfg.kind == ExperimentKind::adversarial_study || cfg.kind == ExperimentKind::random_topology_study) {
    if (cfg.replicas < 2) throw ConfigError("replicas", "Monte Carlo needs at least 2 replicas");
  }

  if (const json* a = find(doc, "analysis")) {
    if (const json* w = find(*a, "fit_window")) {
      const auto v = numbers(*w, "analysis.fit_window");
      if (v.size() != 2 || !(v[0] > 0.0 && v[1] > v[0])) throw ConfigError("analysis.fit_window", "expected [t_lo, t_hi] with 0 < t_lo < t_hi");
      cfg.analysis.fit_window = std::pair{v[0], v[1]};
    }
    if (const json* e = find(*a, "expected_slope")) cfg.analysis.expected_slope = as_number(*e, "analysis.expected_slope");
    cfg.analysis.slope_tolerance = number_or(*a, "slope_tolerance", "analysis", cfg.analysis.slope_tolerance);
    if (const json* m = find(*a, "slope_at_most")) cfg.analysis.slope_at_most = as_number(*m, "analysis.slope_at_most");
    if (const json* b = find(*a, "final_mean_band")) {
      const auto v = numbers(*b, "analysis.final_mean_band");
      if (v.size() != 2 || v[1] < v[0]) throw ConfigError("analysis.final_mean_band", "expected [lo, hi] with lo <= hi");
      cfg.analysis.final_mean_band = std::pair{v[0], v[1]};
    }
  }

  if (cfg.kind == ExperimentKind::manet_study) {
    std::optional<GainSchedule> preset_gains;
    auto scene = parse_scene(require(doc, "scene", ""), "scene", preset_gains);
    if (const json* x = find(doc, "initial_state")) scene.initial_states = numbers(*x, "initial_state");
    guarded("scene", [&] { scene.validate(); return 0; });
    if (const json* g = find(doc, "gains"))
      cfg.gains = parse_gains(*g, "gains", scene.n, 1.0);
    else if (preset_gains)
      cfg.gains = *preset_gains;
    else
      throw ConfigError("gains", "required field is missing");
    cfg.x1 = Eigen::Map<const Vector>(scene.initial_states.data(), scene.n);
    cfg.scene = std::move(scene);
    return cfg;
  }

  cfg.topology = parse_topology(require(doc, "topology", ""), "topology", cfg.seed);
  if (cfg.kind == ExperimentKind::adversarial_study && cfg.topology.kind != ProcessKind::adversarial)
    throw ConfigError("topology.kind", "adversarial_study needs the adversarial topology");
  if (cfg.kind == ExperimentKind::random_topology_study && cfg.topology.kind != ProcessKind::random_A1prime)
    throw ConfigError("topology.kind", "random_topology_study needs the random_A1prime topology");
  const int n = cfg.topology.n;
  const double a_max = cfg.topology.graphs.empty() ? 1.0 : cfg.topology.graphs.front().a_max();
  const bool windowed = cfg.topology.kind == ProcessKind::adversarial || cfg.topology.kind == ProcessKind::extensible_block;
  cfg.gains = parse_gains(require(doc, "gains", ""), "gains", n, a_max,
                          windowed ? std::optional<double>(cfg.topology.delta) : std::nullopt);
  cfg.noise = find(doc, "noise") ? parse_noise(doc["noise"], "noise") : NoiseModel{};

  const auto x = numbers(require(doc, "initial_state", ""), "initial_state");
  if (static_cast<int>(x.size()) != n)
    throw ConfigError("initial_state", "expected " + std::to_string(n) + " entries to match the topology");
  cfg.x1 = Eigen::Map<const Vector>(x.data(), n);
  guarded("topology", [&] { (void)cfg.build_process(); return 0; });
  return cfg;
}

[[nodiscard]] inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path, const Overrides& o = {}) {
  json doc = read_json_file(path);
  apply_overrides(doc, o);
  return parse_config(doc);
}

}  // namespace conslab::cli
