#include "conslab/manet.hpp"
#include "conslab/analysis.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace conslab;
using namespace conslab::manet;

namespace {

const double kBeta = 10.0 * std::numbers::sqrt2;

ManetScene static_scene(std::vector<Point> pts, double alpha) {
  ManetScene s;
  s.n = static_cast<int>(pts.size());
  s.positions0 = std::move(pts);
  s.headings.assign(static_cast<std::size_t>(s.n), 0.0);
  s.speed_scale = 0.0;
  s.radio.alpha.assign(static_cast<std::size_t>(s.n), alpha);
  for (int i = 0; i < s.n; ++i) s.initial_states.push_back(static_cast<double>(i));
  return s;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

TEST(Fspl, Examples) {
  EXPECT_DOUBLE_EQ(fspl(1.0, 1.0), 32.45);
  EXPECT_DOUBLE_EQ(fspl(10.0, 1.0), 52.45);
  EXPECT_NEAR(fspl(2.0, 2.0), 32.45 + 40.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(fspl(2.0, 2.0), 44.49, 5e-3);
  EXPECT_DOUBLE_EQ(fspl(1.0, 1.0, kOffsetFsplConstant), 32.4);
  EXPECT_THROW((void)fspl(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW((void)fspl(1.0, -3.0), std::invalid_argument);
}

TEST(ReceptionProbability, Examples) {
  const double d_half = std::pow(10.0, 4.0 / kBeta);
  EXPECT_NEAR(reception_probability(4.0, kBeta, d_half), 0.5, 1e-15);
  EXPECT_NEAR(1.0 - reception_probability(4.0, kBeta, 1.0), 7.7e-9, 0.05e-9);
  EXPECT_LT(reception_probability(4.0, kBeta, 1e6), 1e-300);
  EXPECT_EQ(reception_probability(4.0, kBeta, 0.0), 1.0);
}

TEST(ReceptionProbability, MonotoneAndMatchesIntegralForm) {
  double prev = 1.0;
  for (double d = 0.01; d < 100.0; d *= 1.05) {
    const double p = reception_probability(2.5, kBeta, d);
    ASSERT_LE(p, prev);
    prev = p;
  }
  // 1/2 + (1/sqrt pi) int_0^z e^{-x^2} dx by Simpson's rule.
  for (double d : {0.3, 1.0, 1.7, 2.4, 4.0}) {
    const double z = 3.0 - kBeta * std::log10(d);
    const int m = 2000;
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double x = z * k / m;
      const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      acc += w * std::exp(-x * x);
    }
    const double integral = acc * (z / m) / 3.0;
    EXPECT_NEAR(reception_probability(3.0, kBeta, d), 0.5 + integral / std::sqrt(std::numbers::pi), 1e-12);
  }
}

TEST(RadioParams, FromLinkBudget) {
  const auto r = RadioParams::from_link_budget({20.0, 30.0}, {2400.0, 900.0}, -80.0, 2.0);
  EXPECT_NEAR(r.beta, 10.0 * std::numbers::sqrt2 / 2.0, 1e-15);
  EXPECT_NEAR(r.alpha[0], (20.0 - 32.4 - 20.0 * std::log10(2400.0) + 80.0) / (std::numbers::sqrt2 * 2.0), 1e-12);
  // At the distance where FSPL (with the offset constant) eats the whole margin, P = 1/2.
  const double d = std::pow(10.0, (30.0 - 32.4 - 20.0 * std::log10(900.0) + 80.0) / 20.0);
  EXPECT_NEAR(reception_probability(r.alpha[1], r.beta, d), 0.5, 1e-12);
  EXPECT_THROW((void)RadioParams::from_link_budget({1.0}, {1.0, 2.0}, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW((void)RadioParams::from_link_budget({1.0}, {1.0}, 0.0, 0.0), std::invalid_argument);
}

TEST(DistanceBudget, ExampleAndResubstitution) {
  const double u = 0.4, U = 1.0, c2 = 1.0, alpha_min = 4.0, c1 = 0.7;
  const std::int64_t l = 100;
  const double d = distance_budget(u, U, c2, kBeta, alpha_min, l);
  EXPECT_NEAR(d, 1.3408, 1e-4);
  const double ll = std::log(100.0);
  EXPECT_NEAR(connectivity_lower_bound(c1, c2, kBeta, alpha_min, d), c1 * std::exp(-U) * std::pow(100.0, -u) * ll, 1e-12);
}

TEST(DistanceBudget, MonotoneInUAndC2) {
  double prev = 0.0;
  for (double U = 0.1; U < 5.0; U += 0.3) {
    const double d = distance_budget(0.3, U, 1.0, kBeta, 4.0, 1000);
    ASSERT_GE(d, prev);
    prev = d;
  }
  prev = 1e300;
  for (double c2 = 0.1; c2 < 5.0; c2 += 0.3) {
    const double d = distance_budget(0.3, 1.0, c2, kBeta, 4.0, 1000);
    ASSERT_LE(d, prev);
    prev = d;
  }
}

TEST(DistanceBudget, Errors) {
  EXPECT_THROW((void)distance_budget(0.01, 0.01, 1.0, kBeta, 4.0, 100), std::domain_error);
  EXPECT_THROW((void)distance_budget(0.5, 1.0, 1.0, kBeta, 4.0, 100), std::invalid_argument);
  EXPECT_THROW((void)distance_budget(0.3, 0.0, 1.0, kBeta, 4.0, 100), std::invalid_argument);
  EXPECT_THROW((void)distance_budget(0.3, 1.0, 1.0, kBeta, 4.0, 1), std::invalid_argument);
}

TEST(ScenarioPreset, Examples) {
  const auto f2 = scenario_preset(Figure::fig2);
  const auto f3 = scenario_preset(Figure::fig3);
  const auto f4 = scenario_preset(Figure::fig4);
  EXPECT_DOUBLE_EQ(f2.scene.relative_speed(0.0), 0.005);
  EXPECT_EQ(f3.scene.speed_exponent, 0.9);
  EXPECT_EQ(f4.scene.speed_exponent, 0.8);
  for (const auto* sc : {&f2, &f3, &f4}) {
    const auto& s = sc->scene;
    EXPECT_EQ(s.n, 9);
    double mean = 0.0;
    for (double x : s.initial_states) mean += x;
    EXPECT_NEAR(mean / 9.0, 0.5, 1e-15);
    EXPECT_NEAR(s.positions0[4].x(), 0.0, 1e-15);
    EXPECT_NEAR(s.positions0[4].y(), 1.0, 1e-15);
    EXPECT_NEAR(s.positions0[8].x(), -1.0, 1e-15);
    EXPECT_NEAR(s.quantization_half_width, 1.0 / 16.0, 0.0);
    EXPECT_EQ(s.reception_noise_sd, 0.05);
    EXPECT_NEAR(gain_value(sc->gains, 1), 1.0 / std::pow(30.0, 0.99), 1e-15);
    EXPECT_NO_THROW(s.validate());
  }
}

TEST(Motion, ExactPiecewiseIntegration) {
  auto s = scenario_preset(Figure::fig3).scene;
  const auto p = positions_at(s, 50);
  double r = 1.0;
  for (int m = 0; m < 50; ++m) r += 1.0 / std::pow(m + 200.0, 0.9);
  for (int i = 0; i < 9; ++i) {
    const double ang = i * std::numbers::pi / 8.0;
    EXPECT_NEAR(p[static_cast<std::size_t>(i)].x(), r * std::cos(ang), 1e-12);
    EXPECT_NEAR(p[static_cast<std::size_t>(i)].y(), r * std::sin(ang), 1e-12);
  }
}

TEST(Motion, GroupVelocityLeavesDistancesUnchanged) {
  auto s = scenario_preset(Figure::fig2).scene;
  auto moved = s;
  moved.group_velocity = Point(0.3, -1.2);
  const auto a = positions_at(s, 77), b = positions_at(moved, 77);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j)
      EXPECT_NEAR((a[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(j)]).norm(),
                  (b[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(j)]).norm(), 1e-12);
  const Vector x = Eigen::Map<const Vector>(s.initial_states.data(), 9);
  const auto ra = simulate_round(s, 77, x, 0.05, StreamKey(3));
  const auto rb = simulate_round(moved, 77, x, 0.05, StreamKey(3));
  EXPECT_EQ(ra.graph, rb.graph);
  EXPECT_TRUE(ra.states.isApprox(rb.states, 1e-14));
}

TEST(SimulateRound, CoLocatedAgentsAreFullyConnected) {
  auto s = static_scene(std::vector<Point>(5, Point(1.0, 1.0)), 20.0);
  const auto r = simulate_round(s, 0, Vector::LinSpaced(5, 0, 4), 0.1, StreamKey(1));
  EXPECT_EQ(r.graph, canonical_graph(5, CanonicalKind::complete_G1));
}

TEST(SimulateRound, OneRoundExactAveraging) {
  auto s = static_scene(std::vector<Point>(6, Point(0.0, 0.0)), 20.0);
  s.quantization_half_width = 0.0;
  s.reception_noise_sd = 0.0;
  const Vector x = (Vector(6) << 0, 1, 2, 3, 4, 8).finished();
  const auto r = simulate_round(s, 3, x, 1.0 / 6.0, StreamKey(2));
  EXPECT_TRUE(r.states.isApprox(Vector::Constant(6, 3.0), 1e-14));
}

TEST(SimulateRound, RealizedGraphsAreUndirectedUnitWeight) {
  const auto sc = scenario_preset(Figure::fig4);
  Vector x = Eigen::Map<const Vector>(sc.scene.initial_states.data(), 9);
  for (std::int64_t l = 0; l < 3000; l += 37) {
    const auto r = simulate_round(sc.scene, l, x, 0.01, StreamKey(5));
    ASSERT_TRUE(r.graph.weights().isApprox(r.graph.weights().transpose(), 0.0));
    ASSERT_TRUE(is_balanced(r.graph, 0.0));
    ASSERT_TRUE(((r.graph.weights().array() == 0.0) || (r.graph.weights().array() == 1.0)).all());
  }
}

TEST(SimulateRound, DistantAgentsRarelyConnect) {
  auto s = static_scene({Point(0, 0), Point(50, 0), Point(0, 50)}, 4.0);
  int edges = 0;
  for (std::int64_t l = 0; l < 500; ++l) edges += static_cast<int>(simulate_round(s, l, Vector::Zero(3), 0.1, StreamKey(8)).graph.edge_count());
  EXPECT_EQ(edges, 0);
}

TEST(RunManet, DeterministicPerSeed) {
  const auto sc = scenario_preset(Figure::fig2);
  const auto a = run_manet(sc.scene, sc.gains, 300, 11, {true, true, true});
  const auto b = run_manet(sc.scene, sc.gains, 300, 11, {true, true, true});
  const auto c = run_manet(sc.scene, sc.gains, 300, 12);
  EXPECT_EQ(a.trace.states, b.trace.states);
  EXPECT_EQ(a.trace.graphs, b.trace.graphs);
  EXPECT_NE(a.trace.states.back(), c.trace.states.back());
  EXPECT_EQ(a.trace.states.size(), 301u);
  EXPECT_EQ(a.trace.gains.size(), 300u);
  EXPECT_EQ(a.positions.size(), 301u);
  EXPECT_NEAR(a.trace.gains[0], 1.0 / std::pow(30.0, 0.99), 1e-15);
}

TEST(RunManet, ZeroNoiseStaticSceneKeepsTheAverage) {
  auto s = static_scene({Point(0, 0), Point(1, 0), Point(2, 0), Point(1.5, 1)}, 4.0);
  s.quantization_half_width = 0.0;
  s.reception_noise_sd = 0.0;
  const auto run = run_manet(s, GainSchedule::power(1.0, 0.99, 0.0, 29.0), 2000, 4);
  for (const auto& x : run.trace.states) ASSERT_NEAR(x.mean(), 1.5, 1e-12);
  EXPECT_LT(run.final_range, 1e-2 * (run.trace.states.front().maxCoeff() - run.trace.states.front().minCoeff()));
}

TEST(RunManet, Fig2ConvergesNearOneHalf) {
  const auto sc = scenario_preset(Figure::fig2);
  double mean = 0.0;
  const int seeds = 8;
  for (int k = 0; k < seeds; ++k) {
    const auto r = run_manet(sc.scene, sc.gains, 3000, static_cast<std::uint64_t>(100 + k), {false, false, false});
    mean += r.trace.final_average;
    EXPECT_LT(r.final_range, 0.2);
  }
  EXPECT_NEAR(mean / seeds, 0.5, 0.05);
}

// Static scene against an independently coded loop: each round every ordered
// pair succeeds with its reception probability, mutual pairs are neighbors, and
// the update is the consensus step with what_i = sum_j (xi_j + zeta_ij).
TEST(RunManet, StaticSceneMatchesIidRandomGraphDynamics) {
  const std::vector<Point> pts{Point(0, 0), Point(1.2, 0), Point(2.1, 0.6), Point(0.7, 1.8)};
  auto s = static_scene(pts, 4.0);
  s.quantization_half_width = 0.1;
  s.reception_noise_sd = 0.08;
  const auto gains = GainSchedule::power(1.0, 0.8, 4.0);
  const int n = 4, rounds = 60, R = 6000;
  const std::vector<int> probes{5, 20, 59};

  std::vector<double> m_manet(probes.size()), s_manet(probes.size()), m_iid(probes.size()), s_iid(probes.size());
  Matrix prob(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      prob(i, j) = i == j ? 0.0 : reception_probability(4.0, kBeta, (pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm());
  ASSERT_GT(prob.maxCoeff(), 0.2);
  const double off_min = (prob + Matrix::Identity(n, n)).minCoeff();
  ASSERT_LT(off_min, 0.8);

  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Vector x0 = Eigen::Map<const Vector>(s.initial_states.data(), n);
  for (int r = 0; r < R; ++r) {
    const auto run = run_manet(s, gains, rounds, static_cast<std::uint64_t>(r), {true, false, false});
    Vector x = x0;
    for (int l = 0; l < rounds; ++l) {
      Matrix w = Matrix::Zero(n, n);
      Matrix ok(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ok(i, j) = i != j && unif(gen) < prob(i, j);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (ok(i, j) > 0 && ok(j, i) > 0) w(i, j) = 1.0;
      const WeightedDigraph g(w, 1.0);
      Vector xi(n);
      for (int j = 0; j < n; ++j) xi(j) = s.quantization_half_width * (2.0 * unif(gen) - 1.0);
      Vector what = Vector::Zero(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (w(i, j) > 0) what(i) += xi(j) + s.reception_noise_sd * gauss(gen);
      x = step(x, g, gain_value(gains, l + 1), what);
      for (std::size_t k = 0; k < probes.size(); ++k) {
        if (l + 1 != probes[k]) continue;
        const double vm = disagreement(run.trace.states[static_cast<std::size_t>(l + 1)]), vi = disagreement(x);
        m_manet[k] += vm;
        s_manet[k] += vm * vm;
        m_iid[k] += vi;
        s_iid[k] += vi * vi;
      }
    }
  }
  for (std::size_t k = 0; k < probes.size(); ++k) {
    const double ma = m_manet[k] / R, mb = m_iid[k] / R;
    const double va = s_manet[k] / R - ma * ma, vb = s_iid[k] / R - mb * mb;
    const double se = std::sqrt(va / R + vb / R);
    EXPECT_NEAR(ma, mb, 4.0 * se) << "round " << probes[k];
  }
}

TEST(RunManet, SlowerSpeedDecayWidensFinalRangeAtShortHorizon) {
  std::vector<double> med;
  for (auto fig : {Figure::fig2, Figure::fig3, Figure::fig4}) {
    const auto sc = scenario_preset(fig);
    std::vector<double> ranges;
    for (int k = 0; k < 15; ++k)
      ranges.push_back(run_manet(sc.scene, sc.gains, 2000, static_cast<std::uint64_t>(k), {false, false, false}).final_range);
    med.push_back(median(ranges));
  }
  EXPECT_LT(med[0], med[2]);
}
