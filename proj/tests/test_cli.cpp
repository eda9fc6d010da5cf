#include "conslab/experiment.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

using namespace conslab;
using namespace conslab::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigDir = CONSLAB_CONFIG_DIR;
const std::string kCli = CONSLAB_CLI_PATH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Scratch {
 public:
  Scratch() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("conslab_cli_" + std::to_string(::getpid()) + "_" + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  [[nodiscard]] const fs::path& path() const { return dir_; }
  [[nodiscard]] fs::path write(const std::string& name, const json& doc) const {
    const auto p = dir_ / name;
    std::ofstream(p) << doc.dump(2);
    return p;
  }

 private:
  fs::path dir_;
};

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(const std::string& args, const fs::path& scratch, const std::string& env = "") {
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + kCli + "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

json small_protocol() {
  return json::parse(R"({
    "experiment": "protocol_run", "name": "small", "seed": 5, "horizon": 50,
    "topology": {"kind": "fixed", "graph": {"n": 3, "edges": [[1, 2], [2, 3], [3, 1]]}},
    "gains": {"kind": "power", "alpha": 0.5, "exponent": 1.0, "t_star": 1},
    "noise": {"kind": "iid_gaussian", "variance": 0.1},
    "initial_state": [0, 1, 2]
  })");
}

std::string config_error_field(const json& doc) {
  try {
    (void)parse_config(doc);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(Hash, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Config, ParsesEveryPreset) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW((void)load_config(entry.path().string())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 10);
}

TEST(Config, ErrorsNameTheFieldPath) {
  auto doc = small_protocol();
  doc.erase("horizon");
  EXPECT_EQ(config_error_field(doc), "horizon");

  doc = small_protocol();
  doc["topology"]["graph"]["edges"][1] = json::array({2, 7});
  EXPECT_EQ(config_error_field(doc), "topology.graph.edges[1]");

  doc = small_protocol();
  doc["gains"]["kind"] = "cubic";
  EXPECT_EQ(config_error_field(doc), "gains.kind");

  doc = small_protocol();
  doc["gains"].erase("alpha");
  EXPECT_EQ(config_error_field(doc), "gains.alpha");

  doc = small_protocol();
  doc["initial_state"] = json::array({1, 2});
  EXPECT_EQ(config_error_field(doc), "initial_state");

  doc = small_protocol();
  doc["noise"]["variance"] = "big";
  EXPECT_EQ(config_error_field(doc), "noise.variance");

  doc = small_protocol();
  doc["experiment"] = "simulate";
  EXPECT_EQ(config_error_field(doc), "experiment");

  doc = small_protocol();
  doc["topology"] = json::parse(R"({"kind": "random_A1prime", "n": 3, "K": 2, "mu": 0.7, "p": 1})");
  EXPECT_EQ(config_error_field(doc), "topology");

  EXPECT_EQ(config_error_field(json::parse(R"({"experiment": "verify_suite", "verify": {"suites": ["lemma1", "lemma9"]}})")),
            "verify.suites[1]");
}

TEST(Config, GraphForms) {
  auto doc = small_protocol();
  const auto cfg = parse_config(doc);
  const auto& g = cfg.topology.graphs.front();
  EXPECT_EQ(g.weight(1, 0), 1.0);  // [1, 2] is the edge 1 -> 2, i.e. weights(2, 1) in 1-based terms
  EXPECT_EQ(g.weight(0, 1), 0.0);
  EXPECT_TRUE(is_balanced(g));

  doc["topology"]["graph"] = json::parse(R"({"n": 4, "shape": "cycle"})");
  doc["initial_state"] = json::array({0, 1, 2, 3});
  const auto cyc = parse_config(doc).topology.graphs.front();
  EXPECT_EQ(cyc.edge_count(), 8u);
  EXPECT_TRUE(is_strongly_connected(cyc));

  doc["topology"]["graph"] = json::parse(R"({"n": 4, "undirected": true, "a_max": 2, "edges": [[1, 3, 2]]})");
  const auto und = parse_config(doc).topology.graphs.front();
  EXPECT_EQ(und.weight(2, 0), 2.0);
  EXPECT_EQ(und.weight(0, 2), 2.0);
}

TEST(Config, Theorem1GainsFollowTheTopologyDelta) {
  const auto cfg = load_config((kConfigDir / "adversarial.json").string());
  const auto expect = theorem1_gain(4, 1.0, 1.0, 0.2);
  EXPECT_EQ(cfg.gains.alpha, expect.alpha);
  EXPECT_EQ(cfg.gains.t_star, expect.t_star);
  EXPECT_EQ(cfg.gains.exponent, 0.8);
}

TEST(Config, OverridesAndHash) {
  auto doc = small_protocol();
  const auto base = parse_config(doc);
  apply_overrides(doc, {7, 20, 3, std::string("/tmp/elsewhere")});
  const auto over = parse_config(doc);
  EXPECT_EQ(over.seed, 7u);
  EXPECT_EQ(over.horizon, 20);
  EXPECT_EQ(over.replicas, 3);
  EXPECT_EQ(over.output_dir, "/tmp/elsewhere");
  EXPECT_NE(over.config_hash, base.config_hash);

  auto moved = small_protocol();
  moved["output_dir"] = "/somewhere/else";
  EXPECT_EQ(parse_config(moved).config_hash, base.config_hash);
}

TEST(Config, SetParameterByDottedPath) {
  auto doc = small_protocol();
  EXPECT_TRUE(has_parameter(doc, "gains.exponent"));
  EXPECT_FALSE(has_parameter(doc, "gains.nothing"));
  set_parameter(doc, "gains.exponent", 0.75);
  EXPECT_EQ(doc["gains"]["exponent"].get<double>(), 0.75);
  set_parameter(doc, "horizon", 40.0);
  EXPECT_TRUE(doc["horizon"].is_number_integer());
  EXPECT_EQ(parse_config(doc).horizon, 40);
}

TEST(Csv, RoundTripAndHeader) {
  Scratch s;
  const auto p = s.path() / "t.csv";
  {
    CsvWriter w(p, {"t", "v", "label"}, "00ff", 9);
    w.cell(std::int64_t{1}).cell(0.1).cell("a");
    w.end_row();
    w.cell(std::int64_t{2}).blank().cell("b");
    w.end_row();
    EXPECT_THROW(w.cell(1.0).end_row(), std::logic_error);
  }
  const auto text = slurp(p);
  EXPECT_EQ(text.substr(0, text.find('\n')), "# config_hash=00ff seed=9");
  const auto t = read_csv(p);
  EXPECT_EQ(t.meta.at("config_hash"), "00ff");
  EXPECT_EQ(t.meta.at("seed"), "9");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], 0.1);
  EXPECT_TRUE(std::isnan(t.rows[1][1]));
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456789.0}) EXPECT_EQ(std::stod(format_number(v)), v);
}

TEST(Plot, StatesChartHasOnePolylinePerAgent) {
  Scratch s;
  const auto p = s.path() / "trace.csv";
  {
    CsvWriter w(p, {"t", "x_1", "x_2", "x_3", "V", "a"}, "h", 1);
    for (int t = 1; t <= 5000; ++t) {
      w.cell(std::int64_t{t}).cell(1.0 / t).cell(-1.0 / t).cell(0.0).cell(2.0 / (t * t)).cell(0.1);
      w.end_row();
    }
  }
  const auto svg = plot_csv(read_csv(p), PlotKind::states);
  const std::regex poly("<polyline");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator()), 3);
  EXPECT_NE(svg.find(">t</text>"), std::string::npos);
  EXPECT_NE(svg.find(">state</text>"), std::string::npos);
  EXPECT_EQ(svg, plot_csv(read_csv(p), PlotKind::states));

  const auto loglog = plot_csv(read_csv(p), PlotKind::loglog_V);
  EXPECT_EQ(std::distance(std::sregex_iterator(loglog.begin(), loglog.end(), poly), std::sregex_iterator()), 1);
  EXPECT_NE(loglog.find(">1e-4<"), std::string::npos);
  EXPECT_THROW((void)plot_csv(read_csv(p), PlotKind::positions), std::invalid_argument);
}

TEST(Plot, PositionsChartMarksInitialLayout) {
  Scratch s;
  const auto p = s.path() / "positions.csv";
  {
    CsvWriter w(p, {"l", "agent", "px", "py"}, "h", 1);
    for (int l = 0; l < 10; ++l)
      for (int a = 1; a <= 4; ++a) {
        w.cell(std::int64_t{l}).cell(a).cell(a + 0.1 * l).cell(0.05 * l * a);
        w.end_row();
      }
  }
  const auto svg = plot_csv(read_csv(p), PlotKind::positions);
  const std::regex circle("<circle");
  EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), circle), std::sregex_iterator()), 4);
}

TEST(Experiment, ProtocolRunArtifactsAndDeterminism) {
  Scratch s;
  auto doc = small_protocol();
  doc["output_dir"] = (s.path() / "a").string();
  const auto ra = run_experiment(parse_config(doc));
  doc["output_dir"] = (s.path() / "b").string();
  const auto rb = run_experiment(parse_config(doc));
  for (const char* f : {"trace.csv", "analysis.csv", "states.svg", "loglog_V.svg"}) {
    ASSERT_TRUE(fs::exists(s.path() / "a" / f)) << f;
    EXPECT_EQ(slurp(s.path() / "a" / f), slurp(s.path() / "b" / f)) << f;
  }
  const auto t = read_csv(s.path() / "a" / "trace.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "x_1", "x_2", "x_3", "V", "a"}));
  ASSERT_EQ(t.rows.size(), 50u);
  EXPECT_EQ(t.rows[0][1], 0.0);
  EXPECT_EQ(t.rows[0][4], 2.0);
  EXPECT_DOUBLE_EQ(t.rows[0][5], 0.5 / 2.0);
  EXPECT_TRUE(std::isnan(t.rows[49][5]));
  EXPECT_EQ(t.meta.at("config_hash"), ra.config_hash);
  EXPECT_EQ(t.meta.at("seed"), "5");

  // The library trace must match the artifact.
  const auto cfg = parse_config(doc);
  const auto tr = run(cfg.build_process(), cfg.gains, cfg.noise, cfg.x1, cfg.horizon, cfg.seed);
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(t.rows[k][4], tr.disagreement[k]);
}

TEST(Experiment, ReportNumbersTraceToAnalysisCsv) {
  Scratch s;
  auto doc = json::parse(slurp(kConfigDir / "random_topology.json"));
  apply_overrides(doc, {std::nullopt, 400, 40, (s.path() / "r").string()});
  const auto r = run_experiment(parse_config(doc));
  const auto report = json::parse(slurp(s.path() / "r" / "report.json"));
  const auto analysis = slurp(s.path() / "r" / "analysis.csv");
  ASSERT_FALSE(report["analysis"].empty());
  for (const auto& row : report["analysis"]) {
    const std::string needle = row["experiment_id"].get<std::string>() + "," + row["quantity"].get<std::string>() + "," +
                               format_number(row["value"].get<double>());
    EXPECT_NE(analysis.find(needle), std::string::npos) << needle;
  }
  for (const auto& c : report["checks"]) {
    const std::string needle = "," + c["name"].get<std::string>() + ".lhs," + format_number(c["lhs"].get<double>());
    EXPECT_NE(analysis.find(needle), std::string::npos) << needle;
  }
  EXPECT_TRUE(r.fit.has_value());
  EXPECT_EQ(report["csv"].size(), r.csv_files.size());
}

TEST(Experiment, MonteCarloMatchesTheTwoAgentHandCase) {
  Scratch s;
  auto doc = json::parse(slurp(kConfigDir / "two_agent_moment.json"));
  doc["output_dir"] = s.path().string();
  doc["horizon"] = 3;
  (void)run_experiment(parse_config(doc));
  const auto exact = read_csv(s.path() / "exact.csv");
  EXPECT_NEAR(exact.rows[1][1], 0.1875, 1e-15);
  const auto mc = read_csv(s.path() / "mc.csv");
  EXPECT_EQ(mc.header, (std::vector<std::string>{"t", "meanV", "stderrV", "replicas"}));
  EXPECT_NEAR(mc.rows[1][1], 0.1875, 4.0 * mc.rows[1][2]);
  EXPECT_EQ(mc.rows[1][3], 10000.0);
}

TEST(Experiment, ManetStudyWritesTracesAndPositions) {
  Scratch s;
  auto doc = json::parse(slurp(kConfigDir / "fig2.json"));
  apply_overrides(doc, {std::nullopt, 200, 6, s.path().string()});
  const auto r = run_experiment(parse_config(doc));
  const auto pos = read_csv(s.path() / "positions.csv");
  EXPECT_EQ(pos.header, (std::vector<std::string>{"l", "agent", "px", "py"}));
  EXPECT_EQ(pos.rows.size(), 201u * 9u);
  EXPECT_NEAR(pos.rows[4][2], 0.0, 1e-15);
  EXPECT_NEAR(pos.rows[4][3], 1.0, 1e-15);
  const auto trace = read_csv(s.path() / "trace.csv");
  EXPECT_EQ(trace.rows.size(), 201u);
  EXPECT_EQ(trace.rows[0][0], 0.0);
  EXPECT_EQ(read_csv(s.path() / "manet.csv").rows.size(), 6u);
  ASSERT_EQ(r.checks.size(), 1u);
  EXPECT_EQ(r.checks[0].name, "final_mean_in_band");
  for (const char* f : {"states.svg", "positions.svg", "loglog_V.svg"}) EXPECT_TRUE(fs::exists(s.path() / f)) << f;
}

TEST(Sweep, SingleValueEqualsRun) {
  Scratch s;
  auto doc = small_protocol();
  doc["experiment"] = "rate_study";
  doc["replicas"] = 20;
  doc["horizon"] = 200;
  doc["output_dir"] = (s.path() / "sweep").string();
  const auto sw = sweep(doc, "gains.exponent", {0.9});
  auto direct = doc;
  direct["gains"]["exponent"] = 0.9;
  direct["output_dir"] = (s.path() / "direct").string();
  direct["name"] = sw.points[0].name;
  (void)run_experiment(parse_config(direct));
  for (const char* f : {"mc.csv", "analysis.csv", "exact.csv"})
    EXPECT_EQ(slurp(s.path() / "sweep" / "point_0" / f), slurp(s.path() / "direct" / f)) << f;
  const auto t = read_csv(s.path() / "sweep" / "sweep.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"value", "slope", "stderr"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][1], sw.points[0].fit->slope);
}

TEST(Sweep, DerivedSeedsAndMissingParameter) {
  Scratch s;
  auto doc = small_protocol();
  doc["experiment"] = "rate_study";
  doc["replicas"] = 10;
  doc["horizon"] = 100;
  doc["output_dir"] = s.path().string();
  const auto sw = sweep(doc, "gains.exponent", {1.0, 0.8, 0.6});
  ASSERT_EQ(sw.points.size(), 3u);
  EXPECT_EQ(sw.points[0].seed, 5u);
  EXPECT_NE(sw.points[1].seed, sw.points[2].seed);
  EXPECT_NE(sw.points[1].seed, 5u);
  EXPECT_EQ(read_csv(s.path() / "sweep.csv").rows.size(), 3u);
  EXPECT_THROW((void)sweep(doc, "gains.nonexistent", {1.0}), ConfigError);
}

TEST(Verify, SuitesPassOnTheDefaultSeed) {
  for (const auto& name : verify::suite_names()) {
    const auto o = verify::run_suite(name, 200, 3);
    EXPECT_TRUE(o.passed()) << name << ": " << o.first_failure;
    EXPECT_LE(o.worst_ratio, 1.0 + 1e-9) << name;
  }
  EXPECT_THROW((void)verify::run_suite("lemma9", 10, 0), std::invalid_argument);
}

TEST(CliBinary, EveryPresetRunsAtReducedHorizon) {
  Scratch s;
  for (const auto& entry : fs::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".json") continue;
    const auto out = s.path() / entry.path().stem();
    const auto r = invoke("--horizon 400 --replicas 24 --out-dir '" + out.string() + "' run '" + entry.path().string() + "'", s.path());
    EXPECT_EQ(r.code, 0) << entry.path() << "\n" << r.err;
    EXPECT_TRUE(fs::exists(out / "analysis.csv")) << entry.path();
    EXPECT_TRUE(fs::exists(out / "report.json")) << entry.path();
  }
  EXPECT_TRUE(fs::exists(s.path() / "fig2" / "states.svg"));
  EXPECT_TRUE(fs::exists(s.path() / "fig2" / "trace.csv"));
  EXPECT_NE(slurp(s.path() / "fig2" / "analysis.csv").find("final_mean_in_band.lhs"), std::string::npos);
}

TEST(CliBinary, SameSeedReproducesByteIdenticalCsv) {
  Scratch s;
  const auto cfg = (kConfigDir / "fig3.json").string();
  ASSERT_EQ(invoke("--horizon 150 --replicas 5 --out-dir '" + (s.path() / "a").string() + "' run '" + cfg + "'", s.path()).code, 0);
  ASSERT_EQ(invoke("run '" + cfg + "' --horizon 150 --replicas 5 --out-dir '" + (s.path() / "b").string() + "'", s.path()).code, 0);
  ASSERT_EQ(invoke("--seed 99 --horizon 150 --replicas 5 --out-dir '" + (s.path() / "c").string() + "' run '" + cfg + "'", s.path()).code, 0);
  for (const char* f : {"trace.csv", "positions.csv", "manet.csv", "mc.csv", "analysis.csv", "states.svg"})
    EXPECT_EQ(slurp(s.path() / "a" / f), slurp(s.path() / "b" / f)) << f;
  EXPECT_NE(slurp(s.path() / "a" / "manet.csv"), slurp(s.path() / "c" / "manet.csv"));
}

TEST(CliBinary, MissingHorizonExitsTwoNamingTheField) {
  Scratch s;
  auto doc = small_protocol();
  doc.erase("horizon");
  const auto r = invoke("run '" + s.write("bad.json", doc).string() + "'", s.path());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("horizon"), std::string::npos) << r.err;
}

TEST(CliBinary, ExitCodes) {
  Scratch s;
  EXPECT_EQ(invoke("", s.path()).code, 2);
  EXPECT_EQ(invoke("frobnicate", s.path()).code, 2);
  EXPECT_EQ(invoke("run '" + (s.path() / "missing.json").string() + "'", s.path()).code, 2);
  std::ofstream(s.path() / "broken.json") << "{ not json";
  EXPECT_EQ(invoke("run '" + (s.path() / "broken.json").string() + "'", s.path()).code, 2);
  auto doc = small_protocol();
  std::ofstream(s.path() / "blocker") << "file";
  doc["output_dir"] = (s.path() / "blocker" / "sub").string();
  EXPECT_EQ(invoke("run '" + s.write("ok.json", doc).string() + "'", s.path()).code, 1);
  EXPECT_EQ(invoke("--help", s.path()).code, 0);
}

TEST(CliBinary, VerifySubcommand) {
  Scratch s;
  const auto r = invoke("--out-dir '" + s.path().string() + "/v' verify '" + (kConfigDir / "verify_suite.json").string() + "' --cases 100", s.path());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("check lemma4: pass"), std::string::npos);
  const auto defaults = invoke("--out-dir '" + s.path().string() + "/d' verify --cases 50", s.path());
  EXPECT_EQ(defaults.code, 0) << defaults.err;
  const auto wrong = invoke("verify '" + (kConfigDir / "fig2.json").string() + "'", s.path());
  EXPECT_EQ(wrong.code, 2);
}

TEST(CliBinary, SweepSubcommand) {
  Scratch s;
  const auto r = invoke("--horizon 300 --replicas 16 --out-dir '" + s.path().string() + "/sw' sweep '" +
                         (kConfigDir / "adversarial.json").string() + "' --param topology.delta --values 0,0.2,0.4",
                     s.path());
  EXPECT_EQ(r.code, 0) << r.err;
  const auto t = read_csv(s.path() / "sw" / "sweep.csv");
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[2][0], 0.4);
  for (const auto& row : t.rows) EXPECT_TRUE(std::isfinite(row[1]));
  const auto missing = invoke("--out-dir '" + s.path().string() + "/m' sweep '" + (kConfigDir / "adversarial.json").string() +
                               "' --param topology.epsilon --values 1",
                           s.path());
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("topology.epsilon"), std::string::npos);
}

TEST(CliBinary, ManetSpeedExponentSweep) {
  Scratch s;
  const auto r = invoke("--horizon 300 --replicas 8 --out-dir '" + s.path().string() + "/b' sweep '" +
                         (kConfigDir / "fig2.json").string() + "' --param scene.speed.exponent --values 1.0,0.9,0.8",
                     s.path());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(s.path() / "b" / "sweep.csv").rows.size(), 3u);
  EXPECT_NE(slurp(s.path() / "b" / "analysis.csv").find("median_final_range"), std::string::npos);
}

TEST(CliBinary, OutputDirectoryFromEnvironment) {
  Scratch s;
  const auto r = invoke("--horizon 30 run '" + (kConfigDir / "protocol_run.json").string() + "'", s.path(),
                     "CONSLAB_OUT_DIR='" + (s.path() / "env").string() + "'");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(s.path() / "env" / "protocol_run" / "trace.csv"));
}

TEST(CliBinary, PlotSubcommand) {
  Scratch s;
  const auto out = s.path() / "run";
  ASSERT_EQ(invoke("--horizon 40 --out-dir '" + out.string() + "' run '" + (kConfigDir / "protocol_run.json").string() + "'", s.path()).code, 0);
  const auto r = invoke("plot '" + (out / "trace.csv").string() + "' --kind states -o '" + (s.path() / "p.svg").string() + "'", s.path());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(s.path() / "p.svg"), slurp(out / "states.svg"));
  EXPECT_EQ(invoke("plot '" + (out / "trace.csv").string() + "' --kind positions", s.path()).code, 2);
  EXPECT_EQ(invoke("plot '" + (out / "trace.csv").string() + "' --kind pie", s.path()).code, 2);
}
