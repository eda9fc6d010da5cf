#pragma once

// Consensus over a mobile ad-hoc network.
//
// Agents broadcast in turn once per period T, each ordered reception
// succeeds with a log-normal-shadowing probability of the distance, and only
// mutually received pairs are used in the update
//   x_i^{l+1} = x_i^l + a_l sum_{j in N_i^l} (x_j^l + xi_j^l + zeta_i^{j,l} - x_i^l).

#include "conslab/dynamics.hpp"
#include "conslab/gain.hpp"
#include "conslab/graph.hpp"
#include "conslab/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace conslab::manet {

using Point = Eigen::Vector2d;

inline constexpr double kFsplConstant = 32.45;       // free-space path loss display form
inline constexpr double kOffsetFsplConstant = 32.4;  // constant inside the alpha_j offset

// Free-space path loss in dB, d in km and f in MHz.
[[nodiscard]] inline double fspl(double d_km, double f_mhz, double constant = kFsplConstant) {
  if (!(d_km > 0.0) || !(f_mhz > 0.0)) throw std::invalid_argument("fspl: distance and frequency must be positive");
  return constant + 20.0 * std::log10(d_km) + 20.0 * std::log10(f_mhz);
}

struct RadioParams {
  std::vector<double> alpha;  // per-agent offset alpha_j
  double beta = 10.0 * std::numbers::sqrt2;
  double shadow_sigma = 1.0;

  // alpha_j = (S_j - 32.4 - 20 log10 f_j - R_th) / (sqrt2 sigma), beta = 10 sqrt2 / sigma.
  static RadioParams from_link_budget(const std::vector<double>& tx_power_dbm, const std::vector<double>& f_mhz,
                                      double r_th, double shadow_sigma, double offset_constant = kOffsetFsplConstant) {
    if (!(shadow_sigma > 0.0)) throw std::invalid_argument("shadowing sigma must be > 0");
    if (tx_power_dbm.size() != f_mhz.size()) throw std::invalid_argument("per-agent radio parameter lengths differ");
    RadioParams r;
    r.shadow_sigma = shadow_sigma;
    r.beta = 10.0 * std::numbers::sqrt2 / shadow_sigma;
    for (std::size_t j = 0; j < f_mhz.size(); ++j)
      r.alpha.push_back((tx_power_dbm[j] - offset_constant - 20.0 * std::log10(f_mhz[j]) - r_th) /
                        (std::numbers::sqrt2 * shadow_sigma));
    return r;
  }
};

// (1 + erf(alpha_j - beta log10 d)) / 2; d -> 0 gives 1.
[[nodiscard]] inline double reception_probability(double alpha_j, double beta, double d_km) {
  if (!(d_km > 0.0)) return 1.0;
  return 0.5 * (1.0 + std::erf(alpha_j - beta * std::log10(d_km)));
}

// Largest window diameter keeping the connectivity lower bound
// c1 e^{-U} l^{-u} log l:
//   exp( sqrt(u log l - log log l + U) / (beta sqrt c2) + (alpha_min - 1) / beta ).
[[nodiscard]] inline double distance_budget(double u, double U, double c2, double beta, double alpha_min, std::int64_t l) {
  if (!(u > 0.0 && u < 0.5)) throw std::invalid_argument("distance_budget: u must lie in (0, 1/2)");
  if (!(U > 0.0) || !(c2 > 0.0) || !(beta > 0.0)) throw std::invalid_argument("distance_budget: U, c2, beta must be > 0");
  if (l < 2) throw std::invalid_argument("distance_budget: l must be >= 2");
  const double ll = std::log(static_cast<double>(l));
  const double radicand = u * ll - std::log(ll) + U;
  if (radicand < 0.0) throw std::domain_error("distance_budget: negative radicand, the bound is vacuous at this l");
  return std::exp(std::sqrt(radicand) / (beta * std::sqrt(c2)) + (alpha_min - 1.0) / beta);
}

// c1 exp(-c2 (beta log d - alpha_min + 1)^2), the connectivity lower bound the
// budget inverts (same logarithm as the exponential in distance_budget).
[[nodiscard]] inline double connectivity_lower_bound(double c1, double c2, double beta, double alpha_min, double d) {
  const double z = beta * std::log(d) - alpha_min + 1.0;
  return c1 * std::exp(-c2 * z * z);
}

struct ManetScene {
  int n = 0;
  std::vector<Point> positions0;  // km
  std::vector<double> headings;   // radians, fixed per agent
  Point group_velocity = Point::Zero();
  // ||v_i(t)|| = speed_scale / (t + speed_offset)^speed_exponent, held at the
  // round-start value within each period.
  double speed_scale = 1.0;
  double speed_offset = 200.0;
  double speed_exponent = 1.0;
  RadioParams radio;
  double period = 1.0;
  std::vector<double> initial_states;
  double quantization_half_width = 1.0 / 16.0;  // xi uniform on [-h, h]
  double reception_noise_sd = 0.05;             // zeta Gaussian

  void validate() const {
    if (n < 2) throw std::invalid_argument("scene needs n >= 2 agents");
    if (positions0.size() != static_cast<std::size_t>(n) || headings.size() != static_cast<std::size_t>(n) ||
        initial_states.size() != static_cast<std::size_t>(n) || radio.alpha.size() != static_cast<std::size_t>(n))
      throw std::invalid_argument("scene: per-agent arrays must have n entries");
    if (!(period > 0.0)) throw std::invalid_argument("scene: period must be > 0");
    if (!(radio.beta > 0.0) || !(radio.shadow_sigma > 0.0)) throw std::invalid_argument("scene: beta and sigma must be > 0");
    if (speed_scale < 0.0 || quantization_half_width < 0.0 || reception_noise_sd < 0.0)
      throw std::invalid_argument("scene: speeds and noise levels must be nonnegative");
  }

  [[nodiscard]] double relative_speed(double t) const {
    if (speed_scale == 0.0) return 0.0;
    return speed_scale / std::pow(t + speed_offset, speed_exponent);
  }
  [[nodiscard]] Point direction(int i) const { return {std::cos(headings[static_cast<std::size_t>(i)]), std::sin(headings[static_cast<std::size_t>(i)])}; }
};

// Positions at the start of round l (time lT).
[[nodiscard]] inline std::vector<Point> positions_at(const ManetScene& s, std::int64_t l) {
  double travelled = 0.0;
  for (std::int64_t m = 0; m < l; ++m) travelled += s.relative_speed(static_cast<double>(m) * s.period) * s.period;
  std::vector<Point> out(static_cast<std::size_t>(s.n));
  const Point group = s.group_velocity * (static_cast<double>(l) * s.period);
  for (int i = 0; i < s.n; ++i) out[static_cast<std::size_t>(i)] = s.positions0[static_cast<std::size_t>(i)] + s.direction(i) * travelled + group;
  return out;
}

struct RoundResult {
  Vector states;
  WeightedDigraph graph;
};

namespace detail {

inline StreamKey round_key(StreamKey run, std::int64_t l) { return run.derive_signed(l); }

}  // namespace detail

// One period [lT, (l+1)T) given the round-start positions.
[[nodiscard]] inline RoundResult simulate_round(const ManetScene& s, std::int64_t l, const std::vector<Point>& start,
                                                const Vector& x, double a_l, StreamKey run) {
  const int n = s.n;
  const double speed = s.relative_speed(static_cast<double>(l) * s.period);
  const StreamKey rk = detail::round_key(run, l);
  const StreamKey rx = rk.derive(StreamTag::reception);
  // received(i, j): i decoded j's broadcast, made at lT + jT/n.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> received(n, n);
  received.setConstant(false);
  for (int j = 0; j < n; ++j) {
    const double tau = static_cast<double>(j) * s.period / n;
    for (int i = 0; i < n; ++i) {
      if (i == j) continue;
      const Point pi = start[static_cast<std::size_t>(i)] + s.direction(i) * (speed * tau);
      const Point pj = start[static_cast<std::size_t>(j)] + s.direction(j) * (speed * tau);
      const double p = reception_probability(s.radio.alpha[static_cast<std::size_t>(j)], s.radio.beta, (pi - pj).norm());
      received(i, j) = rx.derive(static_cast<std::uint64_t>(i) * 4099u + static_cast<std::uint64_t>(j)).uniform(0) < p;
    }
  }
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (received(i, j) && received(j, i)) w(i, j) = w(j, i) = 1.0;

  const StreamKey qk = rk.derive(StreamTag::quantization);
  const StreamKey zk = rk.derive(StreamTag::reception_noise);
  Vector xi(n);
  for (int j = 0; j < n; ++j)
    xi(j) = s.quantization_half_width * (2.0 * qk.derive(static_cast<std::uint64_t>(j)).uniform(0) - 1.0);
  Vector next = x;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      if (w(i, j) == 0.0) continue;
      const double zeta = s.reception_noise_sd * zk.derive(static_cast<std::uint64_t>(i) * 4099u + static_cast<std::uint64_t>(j)).normal(0);
      acc += x(j) + xi(j) + zeta - x(i);
    }
    next(i) = x(i) + a_l * acc;
  }
  return {std::move(next), WeightedDigraph(std::move(w), 1.0)};
}

[[nodiscard]] inline RoundResult simulate_round(const ManetScene& s, std::int64_t l, const Vector& x, double a_l, StreamKey run) {
  return simulate_round(s, l, positions_at(s, l), x, a_l, run);
}

struct ManetRunOptions {
  bool record_states = true;
  bool record_graphs = false;
  bool record_positions = false;
};

struct ManetRun {
  SimulationTrace trace;                       // states x^0 .. x^L
  std::vector<std::vector<Point>> positions;   // round-start positions when recorded
  double final_range = 0.0;                    // max_i x_i^L - min_i x_i^L
};

// Round l uses gain a_l = a(l + 1).
[[nodiscard]] inline ManetRun run_manet(const ManetScene& s, const GainSchedule& gains, std::int64_t horizon_rounds,
                                        std::uint64_t seed, ManetRunOptions opts = {}) {
  s.validate();
  if (horizon_rounds < 0) throw std::invalid_argument("horizon must be >= 0");
  ManetRun out;
  auto& tr = out.trace;
  const StreamKey run = replica_key(seed, 0);
  Vector x = Eigen::Map<const Vector>(s.initial_states.data(), s.n);
  std::vector<Point> pos = positions_at(s, 0);
  auto record = [&](const Vector& v) {
    tr.disagreement.push_back(disagreement(v));
    if (opts.record_states) tr.states.push_back(v);
    if (opts.record_positions) out.positions.push_back(pos);
  };
  record(x);
  for (std::int64_t l = 0; l < horizon_rounds; ++l) {
    const double a = gain_value(gains, l + 1);
    auto r = simulate_round(s, l, pos, x, a, run);
    x = std::move(r.states);
    tr.gains.push_back(a);
    if (opts.record_graphs) tr.graphs.push_back(std::move(r.graph));
    const double dt = s.relative_speed(static_cast<double>(l) * s.period) * s.period;
    for (int i = 0; i < s.n; ++i) pos[static_cast<std::size_t>(i)] += s.direction(i) * dt + s.group_velocity * s.period;
    record(x);
  }
  if (!opts.record_states) tr.states.push_back(x);
  tr.final_average = x.mean();
  out.final_range = x.maxCoeff() - x.minCoeff();
  return out;
}

enum class Figure { fig2, fig3, fig4 };

struct Scenario {
  ManetScene scene;
  GainSchedule gains;
};

// Nine agents on the upper unit semicircle moving radially outward; gain
// 1/(l + 30)^0.99 for round l; relative speed 1/(t + 200)^b with b = 1, 0.9, 0.8.
[[nodiscard]] inline Scenario scenario_preset(Figure fig) {
  Scenario sc;
  auto& s = sc.scene;
  s.n = 9;
  for (int i = 0; i < s.n; ++i) {
    const double ang = i * std::numbers::pi / 8.0;
    s.positions0.emplace_back(std::cos(ang), std::sin(ang));
    s.headings.push_back(ang);
    s.initial_states.push_back(i / 8.0);
  }
  s.period = 1.0;
  s.radio.shadow_sigma = 1.0;
  s.radio.beta = 10.0 * std::numbers::sqrt2;
  s.radio.alpha.assign(static_cast<std::size_t>(s.n), 4.0);
  s.quantization_half_width = 1.0 / 16.0;
  s.reception_noise_sd = 0.05;
  s.speed_scale = 1.0;
  s.speed_offset = 200.0;
  s.speed_exponent = fig == Figure::fig2 ? 1.0 : fig == Figure::fig3 ? 0.9 : 0.8;
  sc.gains = GainSchedule::power(1.0, 0.99, 0.0, 29.0);
  return sc;
}

}  // namespace conslab::manet
