#pragma once

// Topology sequences {G(t)}, t >= 1: connectivity schedules, the extensible
// joint-connectivity check, and the process generators.

#include "conslab/gain.hpp"
#include "conslab/graph.hpp"
#include "conslab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conslab {

struct ConnectivitySchedule {
  double delta = 0.0;
  double c = 1.0;
  std::vector<std::int64_t> times;  // t_1 = 1 < t_2 < ...
};

namespace detail {

// floor(t^delta), robust against pow() landing just below an integer.
inline std::int64_t floor_pow(std::int64_t t, double delta) {
  const double v = std::pow(static_cast<double>(t), delta);
  return static_cast<std::int64_t>(std::floor(v * (1.0 + 1e-12)));
}

inline std::int64_t schedule_increment(std::int64_t t, double delta, double c) {
  const auto inc = static_cast<std::int64_t>(std::floor(c * static_cast<double>(floor_pow(t, delta))));
  return std::max<std::int64_t>(1, inc);
}

}  // namespace detail

// t_1 = 1, t_k = t_{k-1} + max(1, floor(c * floor(t_{k-1}^delta))); all t_k <= horizon.
[[nodiscard]] inline ConnectivitySchedule schedule_times(double delta, double c, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("schedule horizon must be >= 1");
  if (delta < 0.0 || c < 1.0) throw std::invalid_argument("schedule needs delta >= 0 and c >= 1");
  ConnectivitySchedule s{delta, c, {1}};
  for (;;) {
    const auto next = s.times.back() + detail::schedule_increment(s.times.back(), delta, c);
    if (next > horizon) break;
    s.times.push_back(next);
  }
  return s;
}

struct KIndices {
  int k_i;        // min{k : t_k >= i + 1}
  int k_tilde_t;  // max{k : t_k - 1 <= t}
};

// 1-based k, as in the window bookkeeping of the contraction estimates.
[[nodiscard]] inline KIndices k_indices(const ConnectivitySchedule& s, std::int64_t i, std::int64_t t) {
  if (s.times.empty() || i < 1 || t < i || t > s.times.back())
    throw std::out_of_range("k_indices: need 1 <= i <= t <= last scheduled time");
  const auto& ts = s.times;
  const auto lo = std::lower_bound(ts.begin(), ts.end(), i + 1);
  if (lo == ts.end()) throw std::out_of_range("k_indices: no t_k >= i + 1 in schedule");
  const auto hi = std::upper_bound(ts.begin(), ts.end(), t + 1);  // first t_k > t + 1
  return {static_cast<int>(lo - ts.begin()) + 1, static_cast<int>(hi - ts.begin())};
}

// ---- extensible joint-connectivity --------------------------------------

struct GreedyWindows {
  std::vector<std::int64_t> times;  // 1 = t_1 < t_2 < ... (window ends, exclusive)
  std::int64_t trace_end = 0;       // last time in the trace
  // A trailing window [times.back(), trace_end] that never became connected.
  [[nodiscard]] bool has_open_tail() const { return times.back() <= trace_end; }
};

// Earliest-completion windows: from each t_{k-1}, the smallest t_k with the
// union over [t_{k-1}, t_k) strongly connected. A superset window of a
// connected union stays connected, so greedy completion is optimal.
[[nodiscard]] inline GreedyWindows greedy_windows(std::span<const WeightedDigraph> trace) {
  if (trace.empty()) throw std::invalid_argument("empty topology trace");
  GreedyWindows w{{1}, static_cast<std::int64_t>(trace.size())};
  UnionGraph u(trace.front().n());
  for (std::int64_t t = 1; t <= w.trace_end; ++t) {
    u.add(trace[static_cast<std::size_t>(t - 1)]);
    if (is_strongly_connected(u)) {
      w.times.push_back(t + 1);
      u = UnionGraph(u.n());
    }
  }
  return w;
}

struct A1Verdict {
  bool holds = false;
  std::optional<ConnectivitySchedule> witness;
};

[[nodiscard]] inline bool window_within_bound(std::int64_t start, std::int64_t length, double delta, double c) {
  return static_cast<double>(length) <= c * std::pow(static_cast<double>(start), delta) * (1.0 + 1e-12);
}

[[nodiscard]] inline A1Verdict verify_A1(const GreedyWindows& w, double delta, double c) {
  A1Verdict v;
  if (w.times.size() < 2) return v;  // no window ever completed
  for (std::size_t k = 1; k < w.times.size(); ++k)
    if (!window_within_bound(w.times[k - 1], w.times[k] - w.times[k - 1], delta, c)) return v;
  // An open tail already longer than its allowance is a violation too.
  if (w.has_open_tail() && !window_within_bound(w.times.back(), w.trace_end + 1 - w.times.back(), delta, c))
    return v;
  v.holds = true;
  v.witness = ConnectivitySchedule{delta, c, w.times};
  return v;
}

[[nodiscard]] inline A1Verdict verify_A1(std::span<const WeightedDigraph> trace, double delta, double c) {
  return verify_A1(greedy_windows(trace), delta, c);
}

inline constexpr double kDeltaGridStep = 0.01;
inline constexpr double kDeltaGridMax = 4.0;

// Smallest delta on the 0.01 grid for which the trace satisfies (A1) with c.
[[nodiscard]] inline double minimal_delta(std::span<const WeightedDigraph> trace, double c) {
  const auto w = greedy_windows(trace);
  if (w.times.size() < 2)
    throw std::runtime_error("joint connectivity never completes within the trace");
  const int steps = static_cast<int>(std::lround(kDeltaGridMax / kDeltaGridStep));
  for (int k = 0; k <= steps; ++k) {
    const double delta = k * kDeltaGridStep;
    if (verify_A1(w, delta, c).holds) return delta;
  }
  throw std::runtime_error("no extensible exponent on the grid satisfies the trace (first window longer than c?)");
}

// ---- processes ------------------------------------------------------------

enum class ProcessKind { fixed, periodic, extensible_block, adversarial, random_A1prime };

inline std::string to_string(ProcessKind k) {
  switch (k) {
    case ProcessKind::fixed: return "fixed";
    case ProcessKind::periodic: return "periodic";
    case ProcessKind::extensible_block: return "extensible_block";
    case ProcessKind::adversarial: return "adversarial";
    case ProcessKind::random_A1prime: return "random_A1prime";
  }
  return "?";
}

struct RandomA1PrimeParams {
  int K = 1;
  double mu = 0.25;
  double p = 1.0;
};

class TopologyRealization;

// Generator of G(t), t >= 1. Deterministic kinds hold a pool of graphs and a
// per-time index into it. The random kind draws every block from a
// counter-based stream keyed by (realization key, block), so any t can be
// queried in any order.
class TopologyProcess {
 public:
  static TopologyProcess fixed(WeightedDigraph g) {
    TopologyProcess p(ProcessKind::fixed, g.n(), g.a_max());
    p.pool_.push_back(std::move(g));
    return p;
  }

  static TopologyProcess periodic(std::vector<WeightedDigraph> components, int period) {
    if (components.empty() || period != static_cast<int>(components.size()))
      throw std::invalid_argument("periodic process: period must equal the number of components");
    if (!is_strongly_connected(unite(components)))
      throw std::invalid_argument("periodic process: union of components is not strongly connected");
    TopologyProcess p(ProcessKind::periodic, components.front().n(), components.front().a_max());
    for (const auto& g : components) p.a_max_ = std::max(p.a_max_, g.a_max());
    p.pool_ = std::move(components);
    return p;
  }

  // `connected` at the first slot of every schedule window, empty elsewhere.
  static TopologyProcess extensible_block(WeightedDigraph connected, double delta, double c, std::int64_t horizon) {
    if (!is_strongly_connected(connected)) throw std::invalid_argument("extensible_block: block graph must be strongly connected");
    TopologyProcess p(ProcessKind::extensible_block, connected.n(), connected.a_max());
    p.horizon_ = horizon;
    p.schedule_ = schedule_times(delta, c, horizon);
    p.index_.assign(static_cast<std::size_t>(horizon) + 1, 1);
    for (auto t : p.schedule_.times) p.index_[static_cast<std::size_t>(t)] = 0;
    p.pool_.push_back(std::move(connected));
    p.pool_.emplace_back(p.n_, p.a_max_);
    return p;
  }

  // Within each window [t_k, t_{k+1}) of schedule_times(delta, c): G1 at the
  // slot with minimal gain (earliest on ties), G2 elsewhere.
  static TopologyProcess adversarial(const GainSchedule& gains, double delta, double c, int n, std::int64_t horizon) {
    if (horizon < 1) throw std::invalid_argument("adversarial process: horizon must be >= 1");
    TopologyProcess p(ProcessKind::adversarial, n, 1.0);
    p.horizon_ = horizon;
    p.pool_.push_back(canonical_graph(n, CanonicalKind::complete_G1));
    p.pool_.push_back(canonical_graph(n, CanonicalKind::pair_G2));
    p.index_.assign(static_cast<std::size_t>(horizon) + 1, 1);
    // Schedule extended one window past the horizon so the last window is whole.
    p.schedule_ = schedule_times(delta, c, horizon);
    auto& ts = p.schedule_.times;
    ts.push_back(ts.back() + detail::schedule_increment(ts.back(), delta, c));
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      std::int64_t best = ts[k];
      double best_gain = gain_value(gains, ts[k]);
      for (std::int64_t s = ts[k] + 1; s < ts[k + 1]; ++s) {
        if (gains.kind == GainKind::table && static_cast<std::size_t>(s) > gains.table.size()) break;
        const double a = gain_value(gains, s);
        if (a < best_gain) {
          best_gain = a;
          best = s;
        }
      }
      if (best <= horizon) p.index_[static_cast<std::size_t>(best)] = 0;
    }
    return p;
  }

  static TopologyProcess random_A1prime(int K, double mu, double p_const, int n, std::uint64_t seed) {
    if (K < 1) throw std::invalid_argument("random_A1prime: K must be >= 1");
    if (!(mu > 0.0 && mu < 0.5)) throw std::invalid_argument("random_A1prime: mu must lie in (0, 1/2)");
    if (!(p_const > 0.0)) throw std::invalid_argument("random_A1prime: p must be > 0");
    if (n < 2) throw std::invalid_argument("random_A1prime: n must be >= 2");
    TopologyProcess p(ProcessKind::random_A1prime, n, 1.0);
    p.random_ = {K, mu, p_const};
    p.seed_ = seed;
    p.pool_.emplace_back(n, 1.0);
    return p;
  }

  [[nodiscard]] ProcessKind kind() const noexcept { return kind_; }
  [[nodiscard]] int n() const noexcept { return n_; }
  [[nodiscard]] double a_max() const noexcept { return a_max_; }
  [[nodiscard]] bool is_deterministic() const noexcept { return kind_ != ProcessKind::random_A1prime; }
  [[nodiscard]] std::optional<std::int64_t> horizon() const {
    if (kind_ == ProcessKind::adversarial || kind_ == ProcessKind::extensible_block) return horizon_;
    return std::nullopt;
  }
  [[nodiscard]] const ConnectivitySchedule& schedule() const noexcept { return schedule_; }
  [[nodiscard]] const RandomA1PrimeParams& random_params() const noexcept { return random_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  // Deterministic kinds only.
  [[nodiscard]] const WeightedDigraph& graph_at(std::int64_t t) const {
    if (t < 1) throw std::out_of_range("topology time must be >= 1");
    switch (kind_) {
      case ProcessKind::fixed:
        return pool_.front();
      case ProcessKind::periodic:
        return pool_[static_cast<std::size_t>((t - 1) % static_cast<std::int64_t>(pool_.size()))];
      case ProcessKind::extensible_block:
      case ProcessKind::adversarial:
        if (t > horizon_) throw std::out_of_range("topology time beyond the process horizon");
        return pool_[index_[static_cast<std::size_t>(t)]];
      case ProcessKind::random_A1prime:
        break;
    }
    throw std::logic_error("graph_at on a random process; use realize()");
  }

  // True iff the adversarial construction placed G1 at t.
  [[nodiscard]] bool is_primary_slot(std::int64_t t) const { return index_.at(static_cast<std::size_t>(t)) == 0; }

  // ---- random kind -----------------------------------------------------
  // Probability that the block starting at t0 is connected:
  // min(1, p t0^{-mu} log t0), with log floored at 0.
  [[nodiscard]] double block_probability(std::int64_t t0) const {
    const double td = static_cast<double>(t0);
    return std::min(1.0, random_.p * std::pow(td, -random_.mu) * std::max(0.0, std::log(td)));
  }
  [[nodiscard]] std::int64_t block_start(std::int64_t block) const { return block * random_.K + 1; }
  [[nodiscard]] StreamKey block_key(StreamKey realization, std::int64_t block) const {
    return realization.derive(StreamTag::topology).derive(seed_).derive_signed(block);
  }
  [[nodiscard]] bool block_connected(StreamKey realization, std::int64_t block) const {
    return block_key(realization, block).uniform(0) < block_probability(block_start(block));
  }
  // The K graphs of a block: a random Hamiltonian cycle (a single edge when
  // n = 2) split over the slots, or K empty graphs.
  [[nodiscard]] std::vector<WeightedDigraph> block_graphs(StreamKey realization, std::int64_t block) const {
    const int K = random_.K;
    std::vector<Matrix> slots(static_cast<std::size_t>(K), Matrix::Zero(n_, n_));
    if (block_connected(realization, block)) {
      std::vector<int> perm(static_cast<std::size_t>(n_));
      std::iota(perm.begin(), perm.end(), 0);
      StreamEngine eng(block_key(realization, block).derive(1));
      for (int k = n_ - 1; k > 0; --k) std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(eng.integer(0, k))]);
      const int edges = n_ == 2 ? 1 : n_;
      for (int e = 0; e < edges; ++e) {
        const auto slot = static_cast<std::size_t>(static_cast<std::int64_t>(e) * K / edges);
        const int u = perm[static_cast<std::size_t>(e)], v = perm[static_cast<std::size_t>((e + 1) % n_)];
        slots[slot](u, v) = slots[slot](v, u) = 1.0;
      }
    }
    std::vector<WeightedDigraph> out;
    out.reserve(slots.size());
    for (auto& m : slots) out.emplace_back(std::move(m), 1.0);
    return out;
  }

  [[nodiscard]] TopologyRealization realize(StreamKey key) const;
  [[nodiscard]] TopologyRealization realize() const;

  // G(1..horizon) from the process's own seed.
  [[nodiscard]] std::vector<WeightedDigraph> trace(std::int64_t horizon) const;

 private:
  TopologyProcess(ProcessKind kind, int n, double a_max) : kind_(kind), n_(n), a_max_(a_max) {}

  ProcessKind kind_;
  int n_;
  double a_max_;
  std::int64_t horizon_ = 0;
  std::vector<WeightedDigraph> pool_;
  std::vector<std::uint8_t> index_;
  ConnectivitySchedule schedule_;
  RandomA1PrimeParams random_;
  std::uint64_t seed_ = 0;
};

// One sample path of a process. Cheap for deterministic kinds (returns
// references into the process pool); the random kind caches one block.
class TopologyRealization {
 public:
  TopologyRealization(const TopologyProcess& process, StreamKey key) : process_(&process), key_(key) {}

  [[nodiscard]] const WeightedDigraph& at(std::int64_t t) {
    if (process_->is_deterministic()) return process_->graph_at(t);
    if (t < 1) throw std::out_of_range("topology time must be >= 1");
    const std::int64_t K = process_->random_params().K;
    const std::int64_t block = (t - 1) / K;
    if (block != cached_block_) {
      block_ = process_->block_graphs(key_, block);
      cached_block_ = block;
    }
    return block_[static_cast<std::size_t>((t - 1) % K)];
  }

 private:
  const TopologyProcess* process_;
  StreamKey key_;
  std::int64_t cached_block_ = -1;
  std::vector<WeightedDigraph> block_;
};

inline TopologyRealization TopologyProcess::realize(StreamKey key) const { return {*this, key}; }
inline TopologyRealization TopologyProcess::realize() const { return {*this, StreamKey(seed_)}; }

inline std::vector<WeightedDigraph> TopologyProcess::trace(std::int64_t horizon) const {
  auto r = realize();
  std::vector<WeightedDigraph> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(horizon, 0)));
  for (std::int64_t t = 1; t <= horizon; ++t) out.push_back(r.at(t));
  return out;
}

[[nodiscard]] inline TopologyProcess periodic_process(std::vector<WeightedDigraph> components, int period) {
  return TopologyProcess::periodic(std::move(components), period);
}
[[nodiscard]] inline TopologyProcess adversarial_process(const GainSchedule& gains, double delta, double c, int n,
                                                         std::int64_t horizon) {
  return TopologyProcess::adversarial(gains, delta, c, n, horizon);
}
[[nodiscard]] inline TopologyProcess random_A1prime_process(int K, double mu, double p, int n, std::uint64_t seed) {
  return TopologyProcess::random_A1prime(K, mu, p, n, seed);
}

// ---- trace text form: "t=<k>" followed by an edge list, blank-separated ----

inline void write_trace(std::ostream& os, std::span<const WeightedDigraph> trace) {
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << "t=" << (k + 1) << '\n';
    write_edge_list(os, trace[k]);
    os << '\n';
  }
}

inline std::vector<WeightedDigraph> read_trace(std::istream& is) {
  std::vector<WeightedDigraph> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("t=", 0) != 0) throw std::invalid_argument("trace: expected 't=<k>' header, got '" + line + "'");
    const auto t = std::stoll(line.substr(2));
    if (t != static_cast<long long>(out.size()) + 1) throw std::invalid_argument("trace: times must run 1, 2, 3, ...");
    out.push_back(read_edge_list(is));
  }
  return out;
}

}  // namespace conslab
