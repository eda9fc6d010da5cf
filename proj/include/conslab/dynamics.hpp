#pragma once

// The noisy consensus iteration
//   x(t+1) = [I - a(t) L(t)] x(t) + a(t) what(t),   t >= 1,
// single runs, Monte Carlo estimation of E V(x(t)), and exact propagation of
// the centered second moment for deterministic topologies.

#include "conslab/disagreement.hpp"
#include "conslab/gain.hpp"
#include "conslab/graph.hpp"
#include "conslab/noise.hpp"
#include "conslab/rng.hpp"
#include "conslab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace conslab {

// out = (I - a L(g)) x + a what. `out` must not alias `x`.
inline void step_into(const Vector& x, const WeightedDigraph& g, double a, const Vector& what, Vector& out) {
  const int n = g.n();
  const Matrix& w = g.weights();
  out.resize(n);
  for (int i = 0; i < n; ++i) {
    double flow = 0.0;
    for (int j = 0; j < n; ++j) {
      const double aij = w(i, j);
      if (aij != 0.0) flow += aij * (x(j) - x(i));
    }
    out(i) = x(i) + a * (flow + what(i));
  }
}

[[nodiscard]] inline Vector step(const Vector& x, const WeightedDigraph& g, double a, const Vector& what) {
  if (a < 0.0) throw std::invalid_argument("gain must be nonnegative");
  if (x.size() != g.n() || what.size() != g.n()) throw std::invalid_argument("state dimension does not match graph");
  Vector out;
  step_into(x, g, a, what, out);
  return out;
}

// Key of replica r under root seed s. run(seed) is replica 0.
[[nodiscard]] inline StreamKey replica_key(std::uint64_t seed, std::uint64_t replica) {
  return StreamKey(seed).derive(StreamTag::replica).derive(replica);
}

struct SimulationTrace {
  std::vector<Vector> states;            // x(1), ..., x(T)
  std::vector<double> disagreement;      // V(x(t))
  std::vector<double> gains;             // a(1), ..., a(T-1)
  std::vector<WeightedDigraph> graphs;   // G(1), ..., G(T-1) when recorded
  double final_average = 0.0;            // x_ave(T)

  [[nodiscard]] std::int64_t horizon() const { return static_cast<std::int64_t>(states.size()); }
};

struct RunOptions {
  bool record_states = true;
  bool record_graphs = false;
};

namespace detail {

inline void check_run_inputs(const TopologyProcess& process, const Vector& x1, std::int64_t horizon) {
  if (x1.size() != process.n()) throw std::invalid_argument("initial state dimension does not match the process");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (auto h = process.horizon(); h && horizon - 1 > *h)
    throw std::invalid_argument("simulation horizon exceeds the topology process horizon");
}

// Drives one replica, calling visit(t, x(t)) for t = 1..horizon.
template <typename Visit>
void simulate(const TopologyProcess& process, const GainSchedule& gains, const NoiseModel& nm, const Vector& x1,
              std::int64_t horizon, StreamKey key, Visit&& visit,
              const std::function<void(const WeightedDigraph&, double)>& on_step = {}) {
  auto topo = process.realize(key);
  Vector x = x1, next(x1.size()), what(x1.size());
  visit(std::int64_t{1}, x);
  for (std::int64_t t = 1; t < horizon; ++t) {
    const WeightedDigraph& g = topo.at(t);
    const double a = gain_value(gains, t);
    if (a < 0.0) throw std::invalid_argument("gain schedule produced a negative gain");
    aggregate_noise(g, nm, t, key, what);
    step_into(x, g, a, what, next);
    x.swap(next);
    if (on_step) on_step(g, a);
    visit(t + 1, x);
  }
}

}  // namespace detail

[[nodiscard]] inline SimulationTrace run(const TopologyProcess& process, const GainSchedule& gains, const NoiseModel& nm,
                                         const Vector& x1, std::int64_t horizon, std::uint64_t seed,
                                         RunOptions opts = {}) {
  detail::check_run_inputs(process, x1, horizon);
  SimulationTrace tr;
  tr.disagreement.reserve(static_cast<std::size_t>(horizon));
  if (opts.record_states) tr.states.reserve(static_cast<std::size_t>(horizon));
  Vector last = x1;
  detail::simulate(
      process, gains, nm, x1, horizon, replica_key(seed, 0),
      [&](std::int64_t, const Vector& x) {
        tr.disagreement.push_back(disagreement(x));
        if (opts.record_states) tr.states.push_back(x);
        last = x;
      },
      [&](const WeightedDigraph& g, double a) {
        tr.gains.push_back(a);
        if (opts.record_graphs) tr.graphs.push_back(g);
      });
  tr.final_average = last.mean();
  if (!opts.record_states) tr.states.push_back(last);
  return tr;
}

// ---- Monte Carlo -----------------------------------------------------------

struct MonteCarloConfig {
  TopologyProcess process;
  GainSchedule gains;
  NoiseModel noise;
  Vector x1;
  std::int64_t horizon = 1;
};

struct MonteCarloSummary {
  std::vector<double> mean_v;    // indexed t - 1
  std::vector<double> stderr_v;
  Matrix final_states;           // replicas x n, x(T) per replica
  std::int64_t replicas = 0;
};

namespace detail {

struct RunningMoments {
  std::vector<double> mean, m2;
  std::int64_t count = 0;

  explicit RunningMoments(std::size_t len) : mean(len, 0.0), m2(len, 0.0) {}

  // Chan et al. pairwise merge; order of merges fixes the floating result.
  void merge(const RunningMoments& o) {
    if (o.count == 0) return;
    const double na = static_cast<double>(count), nb = static_cast<double>(o.count), nt = na + nb;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const double d = o.mean[k] - mean[k];
      mean[k] += d * nb / nt;
      m2[k] += o.m2[k] + d * d * na * nb / nt;
    }
    count += o.count;
  }
};

// Replica chunks: boundaries depend only on the replica count, so the merged
// statistics are identical for any number of worker threads.
inline std::int64_t chunk_size(std::int64_t replicas) { return std::max<std::int64_t>(32, (replicas + 15) / 16); }

template <typename Work>
void for_each_chunk(std::int64_t chunks, Work&& work) {
  const auto hw = static_cast<std::int64_t>(std::max(1u, std::thread::hardware_concurrency()));
  const auto workers = std::min(hw, chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) work(c);
    return;
  }
  std::vector<std::thread> pool;
  for (std::int64_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::int64_t c = w; c < chunks; c += workers) work(c);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

[[nodiscard]] inline MonteCarloSummary monte_carlo(const MonteCarloConfig& cfg, std::int64_t replicas, std::uint64_t seed) {
  if (replicas < 2) throw std::invalid_argument("monte carlo needs at least 2 replicas");
  detail::check_run_inputs(cfg.process, cfg.x1, cfg.horizon);
  const auto len = static_cast<std::size_t>(cfg.horizon);
  const std::int64_t csize = detail::chunk_size(replicas);
  const std::int64_t chunks = (replicas + csize - 1) / csize;
  std::vector<detail::RunningMoments> parts(static_cast<std::size_t>(chunks), detail::RunningMoments(len));
  MonteCarloSummary out;
  out.replicas = replicas;
  out.final_states.resize(replicas, cfg.process.n());

  detail::for_each_chunk(chunks, [&](std::int64_t c) {
    auto& acc = parts[static_cast<std::size_t>(c)];
    const std::int64_t lo = c * csize, hi = std::min(replicas, lo + csize);
    for (std::int64_t r = lo; r < hi; ++r) {
      ++acc.count;
      const double inv = 1.0 / static_cast<double>(acc.count);
      detail::simulate(cfg.process, cfg.gains, cfg.noise, cfg.x1, cfg.horizon, replica_key(seed, static_cast<std::uint64_t>(r)),
                       [&](std::int64_t t, const Vector& x) {
                         const auto k = static_cast<std::size_t>(t - 1);
                         const double v = disagreement(x);
                         const double d = v - acc.mean[k];
                         acc.mean[k] += d * inv;
                         acc.m2[k] += d * (v - acc.mean[k]);
                         if (t == cfg.horizon) out.final_states.row(r) = x.transpose();
                       });
    }
  });

  detail::RunningMoments total(len);
  for (const auto& p : parts) total.merge(p);
  out.mean_v = std::move(total.mean);
  out.stderr_v.resize(len);
  const double R = static_cast<double>(replicas);
  for (std::size_t k = 0; k < len; ++k) out.stderr_v[k] = std::sqrt(std::max(0.0, total.m2[k]) / (R - 1.0) / R);
  return out;
}

struct MeanVSeries {
  std::vector<double> mean_v;
  std::vector<double> stderr_v;
};

[[nodiscard]] inline MeanVSeries monte_carlo_V(const MonteCarloConfig& cfg, std::int64_t replicas, std::uint64_t seed) {
  auto s = monte_carlo(cfg, replicas, seed);
  return {std::move(s.mean_v), std::move(s.stderr_v)};
}

// ---- exact second moment --------------------------------------------------

using NoiseCovariance = std::function<Matrix(std::int64_t t, const WeightedDigraph& g)>;

// E V(x(t)), t = 1..horizon, for deterministic topologies and noise that is
// uncorrelated across time:
//   M(1) = J x1 x1' J,  M(t+1) = J A_t M(t) A_t' J + a(t)^2 J C(t) J,
// with J = I - 11'/n, A_t = I - a(t) L(t), E V(x(t)) = trace M(t).
[[nodiscard]] inline std::vector<double> exact_second_moment(const TopologyProcess& process, const GainSchedule& gains,
                                                             const NoiseCovariance& noise_cov, const Vector& x1,
                                                             std::int64_t horizon) {
  if (!process.is_deterministic()) throw std::invalid_argument("exact second moment needs a deterministic topology process");
  detail::check_run_inputs(process, x1, horizon);
  const int n = process.n();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix J = I - Matrix::Constant(n, n, 1.0 / n);
  const Vector xc = J * x1;
  Matrix M = xc * xc.transpose();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon));
  out.push_back(M.trace());
  for (std::int64_t t = 1; t < horizon; ++t) {
    const WeightedDigraph& g = process.graph_at(t);
    const double a = gain_value(gains, t);
    const Matrix A = I - a * laplacian(g);
    M = J * (A * M * A.transpose() + a * a * noise_cov(t, g)) * J;
    out.push_back(M.trace());
  }
  return out;
}

[[nodiscard]] inline std::vector<double> exact_second_moment(const TopologyProcess& process, const GainSchedule& gains,
                                                             const NoiseModel& nm, const Vector& x1, std::int64_t horizon) {
  if (!nm.uncorrelated_in_time()) throw std::invalid_argument("exact second moment needs noise uncorrelated across time");
  return exact_second_moment(
      process, gains, [&nm](std::int64_t, const WeightedDigraph& g) { return aggregate_noise_covariance(g, nm); }, x1,
      horizon);
}

// Phi(t, i) = [I - a(t) L(t)] ... [I - a(i) L(i)]; identity when i = t + 1.
[[nodiscard]] inline Matrix transition_product(const TopologyProcess& process, const GainSchedule& gains, std::int64_t i,
                                               std::int64_t t) {
  if (i < 1 || i > t + 1) throw std::invalid_argument("transition product needs 1 <= i <= t + 1");
  const int n = process.n();
  Matrix phi = Matrix::Identity(n, n);
  auto topo = process.realize();
  for (std::int64_t s = i; s <= t; ++s) phi = (Matrix::Identity(n, n) - gain_value(gains, s) * laplacian(topo.at(s))) * phi;
  return phi;
}

}  // namespace conslab
