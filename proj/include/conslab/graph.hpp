#pragma once

// Weighted digraphs, Laplacians and connectivity predicates.
//
// Convention: weights(i, j) = a_ij is the weight with which node i hears
// node j, i.e. the directed edge (j, i). Rows are receivers. Indices are
// 0-based in memory and 1-based in the text format.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace conslab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Edge {
  int from;  // j, the sender
  int to;    // i, the receiver
  double weight = 1.0;
};

class WeightedDigraph {
 public:
  // Empty graph on n nodes.
  explicit WeightedDigraph(int n, double a_max = 1.0) : WeightedDigraph(Matrix::Zero(n < 0 ? 0 : n, n < 0 ? 0 : n), a_max) {}

  WeightedDigraph(Matrix weights, double a_max) : weights_(std::move(weights)), a_max_(a_max) { validate(); }

  static WeightedDigraph from_edges(int n, double a_max, std::span<const Edge> edges) {
    Matrix w = Matrix::Zero(std::max(n, 0), std::max(n, 0));
    for (const auto& e : edges) {
      if (e.from < 0 || e.to < 0 || e.from >= n || e.to >= n)
        throw std::invalid_argument("edge endpoint out of range");
      w(e.to, e.from) = e.weight;
    }
    return WeightedDigraph(std::move(w), a_max);
  }

  // Undirected edges {u, v} with symmetric weight.
  static WeightedDigraph undirected(int n, double a_max, std::span<const std::pair<int, int>> pairs,
                                    double weight = 1.0) {
    std::vector<Edge> edges;
    edges.reserve(2 * pairs.size());
    for (auto [u, v] : pairs) {
      edges.push_back({u, v, weight});
      edges.push_back({v, u, weight});
    }
    return from_edges(n, a_max, edges);
  }

  [[nodiscard]] int n() const noexcept { return static_cast<int>(weights_.rows()); }
  [[nodiscard]] double a_max() const noexcept { return a_max_; }
  [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }
  [[nodiscard]] double weight(int i, int j) const { return weights_(i, j); }
  [[nodiscard]] bool has_edge(int i, int j) const { return weights_(i, j) != 0.0; }

  [[nodiscard]] std::size_t edge_count() const {
    return static_cast<std::size_t>((weights_.array() != 0.0).count());
  }
  [[nodiscard]] bool empty() const { return edge_count() == 0; }

  friend bool operator==(const WeightedDigraph& a, const WeightedDigraph& b) {
    return a.a_max_ == b.a_max_ && a.weights_.rows() == b.weights_.rows() && a.weights_ == b.weights_;
  }

 private:
  void validate() const {
    if (weights_.rows() < 2 || weights_.rows() != weights_.cols())
      throw std::invalid_argument("graph needs a square weight matrix with n >= 2");
    if (!(a_max_ >= 1.0)) throw std::invalid_argument("a_max must be >= 1");
    for (int i = 0; i < n(); ++i) {
      if (weights_(i, i) != 0.0) throw std::invalid_argument("self-loops are not allowed");
      for (int j = 0; j < n(); ++j) {
        const double w = weights_(i, j);
        if (w != 0.0 && !(w >= 1.0 && w <= a_max_))
          throw std::invalid_argument("edge weight outside [1, a_max]");
      }
    }
  }

  Matrix weights_;
  double a_max_ = 1.0;
};

// Union of a window of graphs: presence for connectivity, summed weight for
// the window sums that appear in contraction estimates.
class UnionGraph {
 public:
  explicit UnionGraph(int n) : total_(Matrix::Zero(n, n)) {}

  void add(const WeightedDigraph& g) {
    if (g.n() != n()) throw std::invalid_argument("incompatible graphs: node counts differ");
    total_ += g.weights();
  }

  [[nodiscard]] int n() const noexcept { return static_cast<int>(total_.rows()); }
  [[nodiscard]] bool has_edge(int i, int j) const { return total_(i, j) > 0.0; }
  [[nodiscard]] const Matrix& total_weight() const noexcept { return total_; }

 private:
  Matrix total_;
};

[[nodiscard]] inline UnionGraph unite(std::span<const WeightedDigraph> gs) {
  if (gs.empty()) throw std::invalid_argument("union of an empty sequence");
  UnionGraph u(gs.front().n());
  for (const auto& g : gs) u.add(g);
  return u;
}

[[nodiscard]] inline Matrix laplacian(const WeightedDigraph& g) {
  Matrix L = -g.weights();
  L.diagonal() = g.weights().rowwise().sum();
  return L;
}

struct Degrees {
  Vector in;
  Vector out;
};

[[nodiscard]] inline Degrees degrees(const WeightedDigraph& g) {
  return {g.weights().rowwise().sum(), g.weights().colwise().sum().transpose()};
}

[[nodiscard]] inline double max_in_degree(const WeightedDigraph& g) {
  return g.weights().rowwise().sum().maxCoeff();
}

inline constexpr double kBalanceTolerance = 1e-9;

[[nodiscard]] inline bool is_balanced(const WeightedDigraph& g, double tol = kBalanceTolerance) {
  if (tol < 0.0) throw std::invalid_argument("tolerance must be nonnegative");
  const auto d = degrees(g);
  return ((d.in - d.out).cwiseAbs().array() <= tol).all();
}

// Anything exposing n() and has_edge(i, j) with has_edge(i, j) meaning j -> i.
template <typename G>
concept EdgePresence = requires(const G& g, int i) {
  { g.n() } -> std::convertible_to<int>;
  { g.has_edge(i, i) } -> std::convertible_to<bool>;
};

namespace detail {

// Nodes reachable from `root` following edges forward (j -> i) or backward.
template <EdgePresence G>
std::vector<char> reach(const G& g, int root, bool forward) {
  const int n = g.n();
  std::vector<char> seen(n, 0);
  std::vector<int> stack{root};
  seen[root] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      const bool edge = forward ? g.has_edge(v, u) : g.has_edge(u, v);
      if (edge && !seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

// Strong connectivity: every node is reachable from node 0 and reaches it.
template <EdgePresence G>
[[nodiscard]] bool is_strongly_connected(const G& g) {
  if (g.n() <= 1) return true;
  auto all = [](const std::vector<char>& s) { return std::all_of(s.begin(), s.end(), [](char c) { return c != 0; }); };
  return all(detail::reach(g, 0, true)) && all(detail::reach(g, 0, false));
}

enum class CanonicalKind { complete_G1, pair_G2 };

// G1: complete undirected graph; G2: the single undirected edge {1, 2}.
// Unit weights in both.
[[nodiscard]] inline WeightedDigraph canonical_graph(int n, CanonicalKind kind) {
  if (n < 2) throw std::invalid_argument("canonical graphs need n >= 2");
  Matrix w = Matrix::Zero(n, n);
  if (kind == CanonicalKind::complete_G1) {
    w.setOnes();
    w.diagonal().setZero();
  } else {
    w(0, 1) = w(1, 0) = 1.0;
  }
  return WeightedDigraph(std::move(w), 1.0);
}

// Row-wise Gershgorin bound on lambda_max(L + L').
[[nodiscard]] inline double gershgorin_bound(const WeightedDigraph& g) {
  const Matrix L = laplacian(g);
  double bound = 0.0;
  for (int i = 0; i < g.n(); ++i) {
    double r = 2.0 * L(i, i);
    for (int j = 0; j < g.n(); ++j)
      if (j != i) r += std::abs(L(j, i) + L(i, j));
    bound = std::max(bound, r);
  }
  return bound;
}

[[nodiscard]] inline double lambda_max_symmetric(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

// lambda_max(L + L') for the Laplacian of g.
[[nodiscard]] inline double lambda_max_sym_laplacian(const WeightedDigraph& g) {
  const Matrix L = laplacian(g);
  return lambda_max_symmetric(L + L.transpose());
}

// The orthonormal basis that simultaneously diagonalizes L(G1) and L(G2).
struct Proposition1Basis {
  Matrix P;
  double residual_complete = 0.0;  // ||P diag(0,n,...,n) P' - L1||
  double residual_pair = 0.0;      // ||P diag(0,2,0,...,0) P' - L2||
  double orthogonality = 0.0;      // max_{i != j} |v_i' v_j|
};

[[nodiscard]] inline Proposition1Basis proposition1_basis(int n) {
  if (n < 2) throw std::invalid_argument("basis needs n >= 2");
  Matrix P = Matrix::Zero(n, n);
  P.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
  P(0, 1) = 1.0 / std::sqrt(2.0);
  P(1, 1) = -1.0 / std::sqrt(2.0);
  for (int i = 3; i <= n; ++i) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(i) * i - i);
    for (int r = 0; r < i - 1; ++r) P(r, i - 1) = scale;
    P(i - 1, i - 1) = (1.0 - i) * scale;
  }
  Vector d1 = Vector::Constant(n, static_cast<double>(n));
  d1(0) = 0.0;
  Vector d2 = Vector::Zero(n);
  d2(1) = 2.0;
  Proposition1Basis out;
  out.residual_complete = (P * d1.asDiagonal() * P.transpose() - laplacian(canonical_graph(n, CanonicalKind::complete_G1))).norm();
  out.residual_pair = (P * d2.asDiagonal() * P.transpose() - laplacian(canonical_graph(n, CanonicalKind::pair_G2))).norm();
  Matrix gram = P.transpose() * P;
  gram.diagonal().setZero();
  out.orthogonality = gram.cwiseAbs().maxCoeff();
  out.P = std::move(P);
  return out;
}

// ---- edge-list text form -------------------------------------------------
//   n a_max
//   j i w      (edge (j, i), 1-based, weight w)

inline void write_edge_list(std::ostream& os, const WeightedDigraph& g) {
  os << g.n() << ' ' << g.a_max() << '\n';
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      if (g.has_edge(i, j)) os << (j + 1) << ' ' << (i + 1) << ' ' << g.weight(i, j) << '\n';
}

// Reads one graph: the header and then edge lines until EOF, a blank line or
// a line starting with 't='.
inline WeightedDigraph read_edge_list(std::istream& is) {
  std::string line;
  int n = 0;
  double a_max = 1.0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hs(line);
    if (!(hs >> n >> a_max)) throw std::invalid_argument("edge list: bad header line '" + line + "'");
    break;
  }
  if (n < 2) throw std::invalid_argument("edge list: missing or invalid header");
  std::vector<Edge> edges;
  while (is.peek() != EOF) {
    const auto pos = is.tellg();
    if (!std::getline(is, line)) break;
    if (line.empty()) break;
    if (line.rfind("t=", 0) == 0) {
      is.seekg(pos);
      break;
    }
    if (line[0] == '#') continue;
    std::istringstream ls(line);
    int j = 0, i = 0;
    double w = 0.0;
    if (!(ls >> j >> i >> w)) throw std::invalid_argument("edge list: bad edge line '" + line + "'");
    edges.push_back({j - 1, i - 1, w});
  }
  return WeightedDigraph::from_edges(n, a_max, edges);
}

}  // namespace conslab
