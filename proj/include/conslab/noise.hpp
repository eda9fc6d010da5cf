#pragma once

// Edge-noise models w_ji(t) and the aggregated receiver noise
//   what_i(t) = sum_{j in N_i(t)} a_ij w_ji(t).
//
// Every w_ji(t) is a function of standard-normal innovations eps_ji(s) read
// from the counter stream keyed by (replica, s, i, j). All kinds have zero
// mean and per-edge variance exactly v.

#include "conslab/graph.hpp"
#include "conslab/rng.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace conslab {

enum class NoiseKind { zero, iid_gaussian, iid_uniform, m_dependent_ma, martingale_difference };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::iid_gaussian: return "iid_gaussian";
    case NoiseKind::iid_uniform: return "iid_uniform";
    case NoiseKind::m_dependent_ma: return "m_dependent_ma";
    case NoiseKind::martingale_difference: return "martingale_difference";
  }
  return "?";
}

struct NoiseParams {
  // m_dependent_ma: w(t) = scale * sum_{k=0}^{m} theta_k eps(t-k), m = theta.size()-1.
  std::vector<double> theta;
  // martingale_difference: w(t) = sqrt(v) eps(t) sqrt(1 - kappa + kappa eps(t-1)^2), kappa in [0, 1].
  double kappa = 0.5;
};

class NoiseModel {
 public:
  [[nodiscard]] NoiseKind kind() const noexcept { return kind_; }
  [[nodiscard]] double variance() const noexcept { return v_; }
  [[nodiscard]] const NoiseParams& params() const noexcept { return params_; }
  // Independent across time (exact second-moment propagation applies).
  [[nodiscard]] bool uncorrelated_in_time() const noexcept { return kind_ != NoiseKind::m_dependent_ma; }

  // w_ji(t) for the edge j -> i.
  [[nodiscard]] double sample(StreamKey replica, std::int64_t t, int i, int j) const {
    switch (kind_) {
      case NoiseKind::zero:
        return 0.0;
      case NoiseKind::iid_gaussian:
        return sd_ * innovation(replica, t, i, j);
      case NoiseKind::iid_uniform:
        return half_width_ * (2.0 * edge_key(replica, t, i, j).uniform(0) - 1.0);
      case NoiseKind::m_dependent_ma: {
        double acc = 0.0;
        for (std::size_t k = 0; k < params_.theta.size(); ++k)
          acc += params_.theta[k] * innovation(replica, t - static_cast<std::int64_t>(k), i, j);
        return ma_scale_ * acc;
      }
      case NoiseKind::martingale_difference: {
        const double prev = innovation(replica, t - 1, i, j);
        return sd_ * innovation(replica, t, i, j) * std::sqrt(1.0 - params_.kappa + params_.kappa * prev * prev);
      }
    }
    return 0.0;
  }

  // Fast path for time-independent kinds with the per-time key precomputed.
  [[nodiscard]] double sample_iid(StreamKey time_key, int i, int j) const {
    const StreamKey k = time_key.derive(pair_index(i, j));
    return kind_ == NoiseKind::iid_uniform ? half_width_ * (2.0 * k.uniform(0) - 1.0) : sd_ * k.normal(0);
  }
  [[nodiscard]] bool is_iid() const noexcept {
    return kind_ == NoiseKind::iid_gaussian || kind_ == NoiseKind::iid_uniform;
  }
  static StreamKey time_key(StreamKey replica, std::int64_t t) {
    return replica.derive(StreamTag::edge_noise).derive_signed(t);
  }

  friend NoiseModel make_noise(NoiseKind kind, double v, NoiseParams params);

 private:
  static std::uint64_t pair_index(int i, int j) {
    return static_cast<std::uint64_t>(i) * 4099u + static_cast<std::uint64_t>(j);
  }
  static StreamKey edge_key(StreamKey replica, std::int64_t t, int i, int j) {
    return time_key(replica, t).derive(pair_index(i, j));
  }
  static double innovation(StreamKey replica, std::int64_t t, int i, int j) { return edge_key(replica, t, i, j).normal(0); }

  NoiseKind kind_ = NoiseKind::zero;
  double v_ = 0.0;
  double sd_ = 0.0;
  double half_width_ = 0.0;
  double ma_scale_ = 0.0;
  NoiseParams params_;
};

inline NoiseModel make_noise(NoiseKind kind, double v, NoiseParams params = {}) {
  NoiseModel m;
  m.kind_ = kind;
  if (kind == NoiseKind::zero) return m;
  if (!(v > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  m.v_ = v;
  m.sd_ = std::sqrt(v);
  m.half_width_ = std::sqrt(3.0 * v);
  if (kind == NoiseKind::m_dependent_ma) {
    if (params.theta.empty()) throw std::invalid_argument("m_dependent_ma needs at least one weight theta_0");
    const double ss = std::inner_product(params.theta.begin(), params.theta.end(), params.theta.begin(), 0.0);
    if (!(ss > 0.0)) throw std::invalid_argument("m_dependent_ma weights must not all vanish");
    m.ma_scale_ = std::sqrt(v / ss);
  }
  if (kind == NoiseKind::martingale_difference && !(params.kappa >= 0.0 && params.kappa <= 1.0))
    throw std::invalid_argument("martingale_difference kappa must lie in [0, 1]");
  m.params_ = std::move(params);
  return m;
}

// Uniform on [-h, h]: variance h^2 / 3.
inline NoiseModel uniform_noise_half_width(double h) { return make_noise(NoiseKind::iid_uniform, h * h / 3.0); }
inline NoiseModel gaussian_noise_sd(double sd) { return make_noise(NoiseKind::iid_gaussian, sd * sd); }

// what(t) into `out` (resized to n).
inline void aggregate_noise(const WeightedDigraph& g, const NoiseModel& nm, std::int64_t t, StreamKey replica, Vector& out) {
  const int n = g.n();
  out.setZero(n);
  if (nm.kind() == NoiseKind::zero) return;
  const Matrix& w = g.weights();
  const StreamKey tk = NoiseModel::time_key(replica, t);
  const bool iid = nm.is_iid();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0) acc += w(i, j) * (iid ? nm.sample_iid(tk, i, j) : nm.sample(replica, t, i, j));
    out(i) = acc;
  }
}

[[nodiscard]] inline Vector aggregate_noise(const WeightedDigraph& g, const NoiseModel& nm, std::int64_t t, StreamKey replica) {
  Vector out;
  aggregate_noise(g, nm, t, replica, out);
  return out;
}

// Covariance of what(t): independent edges give diag(v * sum_j a_ij^2).
[[nodiscard]] inline Matrix aggregate_noise_covariance(const WeightedDigraph& g, const NoiseModel& nm) {
  if (!nm.uncorrelated_in_time())
    throw std::invalid_argument("aggregate noise covariance is only defined per time for time-uncorrelated kinds");
  Vector d = nm.variance() * g.weights().array().square().rowwise().sum().matrix();
  return d.asDiagonal();
}

}  // namespace conslab
