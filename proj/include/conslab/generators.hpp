#pragma once

// Random graph and trace instances for property checks.

#include "conslab/graph.hpp"
#include "conslab/rng.hpp"
#include "conslab/topology.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace conslab::generate {

// Directed graph, each ordered pair present with probability p, integer
// weights in [1, a_max].
inline WeightedDigraph random_digraph(StreamEngine& rng, int n, double p, int a_max = 1) {
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng.uniform() < p) w(i, j) = static_cast<double>(rng.integer(1, a_max));
  return WeightedDigraph(std::move(w), a_max);
}

// Undirected (hence balanced) graph with symmetric integer weights.
inline WeightedDigraph random_undirected(StreamEngine& rng, int n, double p, int a_max = 1) {
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) w(i, j) = w(j, i) = static_cast<double>(rng.integer(1, a_max));
  return WeightedDigraph(std::move(w), a_max);
}

// Balanced digraph: a sum of unit-weight directed cycles, each kept only
// if it leaves every weight within a_max.
inline WeightedDigraph random_balanced(StreamEngine& rng, int n, int cycles, int a_max = 3) {
  Matrix w = Matrix::Zero(n, n);
  std::vector<int> nodes(static_cast<std::size_t>(n));
  for (int c = 0; c < cycles; ++c) {
    const int len = static_cast<int>(rng.integer(2, n));
    for (int k = 0; k < n; ++k) nodes[static_cast<std::size_t>(k)] = k;
    for (int k = n - 1; k > 0; --k) std::swap(nodes[static_cast<std::size_t>(k)], nodes[static_cast<std::size_t>(rng.integer(0, k))]);
    Matrix cyc = Matrix::Zero(n, n);
    for (int k = 0; k < len; ++k) cyc(nodes[static_cast<std::size_t>((k + 1) % len)], nodes[static_cast<std::size_t>(k)]) += 1.0;
    if (((w + cyc).array() <= a_max).all()) w += cyc;
  }
  return WeightedDigraph(std::move(w), a_max);
}

inline Vector random_vector(StreamEngine& rng, int n, double scale = 1.0) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = scale * rng.normal();
  return x;
}

// Balanced trace satisfying (A1) on schedule_times(delta, c, horizon): sparse
// random balanced graphs everywhere, plus an undirected Hamiltonian cycle on
// one random slot of every window so each window union is connected.
struct A1Trace {
  std::vector<WeightedDigraph> graphs;  // G(1..T), T = last scheduled time - 1
  ConnectivitySchedule schedule;
};

inline A1Trace random_A1_trace(StreamEngine& rng, int n, double delta, double c, std::int64_t horizon, int a_max = 2) {
  A1Trace out;
  out.schedule = schedule_times(delta, c, horizon);
  const auto& ts = out.schedule.times;
  const std::int64_t T = ts.back() - 1;
  for (std::int64_t t = 1; t <= T; ++t) {
    out.graphs.push_back(rng.uniform() < 0.5 ? WeightedDigraph(n, a_max) : random_balanced(rng, n, 1, a_max));
  }
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const std::int64_t slot = rng.integer(ts[k], ts[k + 1] - 1);
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(rng.integer(0, i))]);
    Matrix w = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const int u = perm[static_cast<std::size_t>(i)], v = perm[static_cast<std::size_t>((i + 1) % n)];
      if (u != v) w(u, v) = w(v, u) = 1.0;
    }
    out.graphs[static_cast<std::size_t>(slot - 1)] = WeightedDigraph(std::move(w), a_max);
  }
  return out;
}

}  // namespace conslab::generate
