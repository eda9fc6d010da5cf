#pragma once

// Randomized property suites run by the verify_suite experiment.

#include "conslab/analysis.hpp"
#include "conslab/generators.hpp"
#include "conslab/graph.hpp"
#include "conslab/rng.hpp"
#include "conslab/topology.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace conslab::verify {

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"lemma1", "lemma4", "lemma6", "proposition1", "doubly_stochastic"};
  return names;
}

struct SuiteOutcome {
  std::string name;
  int cases = 0;
  int failures = 0;
  double worst_ratio = 0.0;  // max lhs/rhs (or residual/tolerance); <= 1 when passing
  std::string first_failure;

  [[nodiscard]] bool passed() const noexcept { return failures == 0; }
};

namespace detail {

inline StreamEngine suite_engine(std::uint64_t seed, std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : name) h = (h ^ ch) * 0x100000001b3ULL;
  return StreamEngine(StreamKey(seed).derive(StreamTag::test_case).derive(h));
}

inline void record(SuiteOutcome& out, bool holds, double ratio, const std::string& what) {
  ++out.cases;
  out.worst_ratio = std::max(out.worst_ratio, ratio);
  if (!holds) {
    if (out.failures == 0) out.first_failure = what;
    ++out.failures;
  }
}

inline double ratio(double lhs, double rhs) { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? 1e300 : 0.0); }

// Contraction over joint-connectivity windows on random balanced traces
// satisfying the connectivity schedule.
inline SuiteOutcome lemma1(int cases, std::uint64_t seed) {
  SuiteOutcome out;
  out.name = "lemma1";
  auto rng = suite_engine(seed, out.name);
  for (int k = 0; k < cases; ++k) {
    const int n = static_cast<int>(rng.integer(2, 6));
    const double delta = rng.uniform(0.0, 0.8);
    const double c = static_cast<double>(rng.integer(1, 3));
    const auto tr = generate::random_A1_trace(rng, n, delta, c, rng.integer(20, 200));
    double d_max = 0.0;
    for (const auto& g : tr.graphs) d_max = std::max(d_max, max_in_degree(g));
    const auto gains = GainSchedule::power(rng.uniform(0.1, 0.99) / d_max, rng.uniform(0.0, 1.0), 0.0);
    const auto T = static_cast<std::int64_t>(tr.graphs.size());
    const std::int64_t i = rng.integer(1, std::max<std::int64_t>(1, T - 1));
    const std::int64_t t = rng.integer(i, T);
    const auto r = lemma1_check(tr.graphs, gains, tr.schedule, generate::random_vector(rng, n, 2.0), i, t);
    std::ostringstream what;
    what << "case " << k << ": n=" << n << " delta=" << delta << " i=" << i << " t=" << t << " lhs=" << r.lhs << " rhs=" << r.rhs;
    record(out, r.holds, ratio(r.lhs, r.rhs), what.str());
  }
  return out;
}

// Both product bounds on random schedules; draws whose factors leave (0, 1)
// are outside the bound's hypotheses and are redrawn.
inline SuiteOutcome lemma4(int cases, std::uint64_t seed) {
  SuiteOutcome out;
  out.name = "lemma4";
  auto rng = suite_engine(seed, out.name);
  while (out.cases < cases) {
    const double delta = rng.uniform(0.0, 0.5);
    const double c = static_cast<double>(rng.integer(1, 4));
    const auto s = schedule_times(delta, c, 20000);
    const double c1 = rng.uniform(0.05, 5.0);
    const double t_star = std::floor(c1) + static_cast<double>(rng.integer(0, 50));
    const std::int64_t i = rng.integer(1, s.times.back() - 1);
    const std::int64_t t = rng.integer(i, s.times.back());
    Lemma4Result r;
    try {
      r = lemma4_bounds(s, c1, t_star, delta, i, t);
    } catch (const std::domain_error&) {
      continue;
    }
    std::ostringstream what;
    what << "delta=" << delta << " c=" << c << " c1=" << c1 << " t*=" << t_star << " i=" << i << " t=" << t;
    record(out, r.power_holds() && r.log_holds(),
           std::max(ratio(r.lhs_product, r.rhs_power), ratio(r.lhs_log_product, r.rhs_log_power)), what.str());
  }
  return out;
}

// One-step lower bound on random directed graphs and gains.
inline SuiteOutcome lemma6(int cases, std::uint64_t seed) {
  SuiteOutcome out;
  out.name = "lemma6";
  auto rng = suite_engine(seed, out.name);
  for (int k = 0; k < cases; ++k) {
    const int n = static_cast<int>(rng.integer(2, 9));
    const auto g = generate::random_digraph(rng, n, rng.uniform(0.1, 0.9), static_cast<int>(rng.integer(1, 4)));
    const double a = rng.uniform(0.0, 1.0);
    const auto r = lemma6_check(g, a, generate::random_vector(rng, n, 3.0));
    std::ostringstream what;
    what << "case " << k << ": n=" << n << " a=" << a << " lhs=" << r.lhs << " rhs=" << r.rhs;
    record(out, r.holds, ratio(r.rhs, r.lhs), what.str());
  }
  return out;
}

// Common eigenbasis of L(G1) and L(G2): relative residuals of both
// factorizations, orthonormality, and the action on a random vector.
inline SuiteOutcome proposition1(int cases, std::uint64_t seed) {
  SuiteOutcome out;
  out.name = "proposition1";
  auto rng = suite_engine(seed, out.name);
  constexpr double tol = 1e-9;
  for (int k = 0; k < cases; ++k) {
    const int n = static_cast<int>(rng.integer(2, 64));
    const auto b = proposition1_basis(n);
    const Matrix L1 = laplacian(canonical_graph(n, CanonicalKind::complete_G1));
    const Matrix L2 = laplacian(canonical_graph(n, CanonicalKind::pair_G2));
    Vector d1 = Vector::Constant(n, static_cast<double>(n));
    d1(0) = 0.0;
    const Vector z = generate::random_vector(rng, n, 1.0);
    const double action = (b.P * (d1.asDiagonal() * (b.P.transpose() * z)) - L1 * z).norm() / (L1.norm() * z.norm());
    const double worst = std::max({b.residual_complete / L1.norm(), b.residual_pair / L2.norm(), b.orthogonality, action});
    std::ostringstream what;
    what << "case " << k << ": n=" << n << " relative residual=" << worst;
    record(out, worst <= tol, worst / tol, what.str());
  }
  return out;
}

// I - aL is doubly stochastic for balanced graphs with a <= 1/d_max.
inline SuiteOutcome doubly_stochastic(int cases, std::uint64_t seed) {
  SuiteOutcome out;
  out.name = "doubly_stochastic";
  auto rng = suite_engine(seed, out.name);
  for (int k = 0; k < cases; ++k) {
    const int n = static_cast<int>(rng.integer(2, 9));
    const auto g = k % 2 == 0 ? generate::random_balanced(rng, n, 5) : generate::random_undirected(rng, n, 0.5, 3);
    const double d_max = max_in_degree(g);
    const double a = d_max > 0.0 ? rng.uniform(0.0, 1.0) / d_max : rng.uniform();
    const bool ok = is_balanced(g) && is_doubly_stochastic(Matrix::Identity(n, n) - a * laplacian(g));
    std::ostringstream what;
    what << "case " << k << ": n=" << n << " a=" << a;
    record(out, ok, ok ? 0.0 : 1e300, what.str());
  }
  return out;
}

}  // namespace detail

[[nodiscard]] inline SuiteOutcome run_suite(std::string_view name, int cases, std::uint64_t seed) {
  if (cases < 1) throw std::invalid_argument("suite needs at least one case");
  if (name == "lemma1") return detail::lemma1(cases, seed);
  if (name == "lemma4") return detail::lemma4(cases, seed);
  if (name == "lemma6") return detail::lemma6(cases, seed);
  if (name == "proposition1") return detail::proposition1(cases, seed);
  if (name == "doubly_stochastic") return detail::doubly_stochastic(cases, seed);
  throw std::invalid_argument("unknown suite '" + std::string(name) + "'");
}

}  // namespace conslab::verify
