#pragma once

// Rate fitting, consensus-value statistics and numerical checks of the
// contraction / product bounds behind the convergence theorems.

#include "conslab/disagreement.hpp"
#include "conslab/dynamics.hpp"
#include "conslab/gain.hpp"
#include "conslab/graph.hpp"
#include "conslab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace conslab {

// ---- rate fits -------------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  std::pair<double, double> window{0.0, 0.0};
  std::size_t points = 0;
  double rss = 0.0;  // residual sum of squares in log space
};

inline constexpr std::size_t kMinFitPoints = 10;

// Least squares of log y on log t over t_lo <= t <= t_hi.
[[nodiscard]] inline RateFit fit_rate(std::span<const double> ts, std::span<const double> ys, std::pair<double, double> window) {
  if (ts.size() != ys.size()) throw std::invalid_argument("fit_rate: t and y lengths differ");
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < window.first || ts[k] > window.second) continue;
    if (!(ys[k] > 0.0) || !(ts[k] > 0.0)) throw std::domain_error("fit_rate: series values must be strictly positive");
    lx.push_back(std::log(ts[k]));
    ly.push_back(std::log(ys[k]));
  }
  if (lx.size() < kMinFitPoints) throw std::invalid_argument("fit_rate: window holds fewer than 10 points");
  const double m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - (f.intercept + f.slope * lx[k]);
    f.rss += r * r;
  }
  f.stderr_slope = std::sqrt(f.rss / (m - 2.0) / sxx);
  f.window = window;
  f.points = lx.size();
  return f;
}

// Series indexed by t = 1, 2, ...
[[nodiscard]] inline RateFit fit_rate(std::span<const double> series, std::pair<double, double> window) {
  std::vector<double> ts(series.size());
  for (std::size_t k = 0; k < ts.size(); ++k) ts[k] = static_cast<double>(k + 1);
  return fit_rate(ts, series, window);
}

// Drops the first 20% of the horizon, where V(Phi(t,1)x(1)) still dominates.
[[nodiscard]] inline std::pair<double, double> default_fit_window(std::int64_t horizon) {
  return {std::max(1.0, 0.2 * static_cast<double>(horizon)), static_cast<double>(horizon)};
}

// Log-space comparison of y = A / log t against the best power law y = B t^s.
struct LogRegimeComparison {
  double rss_inverse_log = 0.0;
  double rss_power = 0.0;
  double inverse_log_scale = 0.0;  // A
  RateFit power;
};

[[nodiscard]] inline LogRegimeComparison compare_inverse_log(std::span<const double> series, std::pair<double, double> window) {
  LogRegimeComparison out;
  out.power = fit_rate(series, window);
  out.rss_power = out.power.rss;
  std::vector<double> resid;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double t = static_cast<double>(k + 1);
    if (t < window.first || t > window.second) continue;
    if (!(t > 1.0)) throw std::domain_error("inverse-log model needs t > 1");
    resid.push_back(std::log(series[k]) + std::log(std::log(t)));
  }
  double mean = 0.0;
  for (double r : resid) mean += r;
  mean /= static_cast<double>(resid.size());
  for (double r : resid) out.rss_inverse_log += (r - mean) * (r - mean);
  out.inverse_log_scale = std::exp(mean);
  return out;
}

// ---- consensus value ---------------------------------------------------------

struct ConsensusStats {
  double mean_final = 0.0;
  double var_final = 0.0;
  double target_average = 0.0;
  std::int64_t replicas = 0;

  [[nodiscard]] double standard_error() const { return std::sqrt(var_final / static_cast<double>(replicas)); }
};

// Per-replica consensus value = average of x(T).
[[nodiscard]] inline ConsensusStats consensus_stats(const Matrix& final_states, const Vector& x1) {
  const auto R = final_states.rows();
  if (R < 2) throw std::invalid_argument("consensus_stats needs at least 2 replicas");
  const Vector values = final_states.rowwise().mean();
  ConsensusStats s;
  s.replicas = R;
  s.mean_final = values.mean();
  s.var_final = (values.array() - s.mean_final).square().sum() / static_cast<double>(R - 1);
  s.target_average = x1.mean();
  return s;
}

// ---- product bounds on recursion-built schedules -----------------------------

struct Lemma4Result {
  double lhs_product = 1.0;
  double rhs_power = 0.0;
  double lhs_log_product = 1.0;
  double rhs_log_power = 0.0;

  [[nodiscard]] bool power_holds() const { return lhs_product < rhs_power; }
  [[nodiscard]] bool log_holds() const { return lhs_log_product < rhs_log_power; }
};

//   prod_{j=k^i}^{k~^t-1} (1 - c1/(t_{j+1}^{1-d} + t*))
//       < ((i^{1-d} + 2c + t*) / ((t+1)^{1-d} + t*))^{c1/(2c)}
//   prod_{j=k^i}^{k~^t-1} (1 - c1/((t_{j+1}^{1-d} + t*) log(t_{j+1} + t*)))
//       < (log(2c + i^{1-d} + t*) / log((t+1)^{1-d} + t*))^{c1(1-d)/(2c)}
[[nodiscard]] inline Lemma4Result lemma4_bounds(const ConnectivitySchedule& s, double c1, double t_star, double delta,
                                                std::int64_t i, std::int64_t t) {
  if (!(c1 > 0.0) || t_star < 0.0) throw std::invalid_argument("lemma4_bounds: need c1 > 0 and t* >= 0");
  const auto [k_i, k_t] = k_indices(s, i, t);
  const double e = 1.0 - delta;
  const double c = s.c;
  Lemma4Result r;
  for (int j = k_i; j <= k_t - 1; ++j) {
    const double tj1 = static_cast<double>(s.times[static_cast<std::size_t>(j)]);  // t_{j+1}, 1-based
    const double base = std::pow(tj1, e) + t_star;
    const double f = 1.0 - c1 / base;
    const double flog = 1.0 - c1 / (base * std::log(tj1 + t_star));
    if (!(f > 0.0 && f < 1.0) || !(flog > 0.0 && flog < 1.0))
      throw std::domain_error("lemma4_bounds: a product factor falls outside (0, 1)");
    r.lhs_product *= f;
    r.lhs_log_product *= flog;
  }
  const double id = static_cast<double>(i), t1 = static_cast<double>(t + 1);
  r.rhs_power = std::pow((std::pow(id, e) + 2.0 * c + t_star) / (std::pow(t1, e) + t_star), c1 / (2.0 * c));
  r.rhs_log_power =
      std::pow(std::log(2.0 * c + std::pow(id, e) + t_star) / std::log(std::pow(t1, e) + t_star), c1 * e / (2.0 * c));
  return r;
}

// ---- contraction checks ------------------------------------------------------

inline constexpr double kCheckRelTol = 1e-9;

struct BoundCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

// V(Phi(t, i+1) z) <= V(z) prod_{l=k^i}^{k~^t-1} (1 - d_l (1-d_l)^2 e_l / (n (n-1)^2)),
// d_l = min window gain, e_l = min window (1 - a d_max), windows from
// `schedule`, which must witness joint connectivity of `trace` (trace[0] = G(1)).
[[nodiscard]] inline BoundCheck lemma1_check(std::span<const WeightedDigraph> trace, const GainSchedule& gains,
                                             const ConnectivitySchedule& schedule, const Vector& z, std::int64_t i,
                                             std::int64_t t) {
  if (trace.empty()) throw std::invalid_argument("lemma1_check: empty trace");
  if (t > static_cast<std::int64_t>(trace.size())) throw std::out_of_range("lemma1_check: t beyond trace");
  const int n = trace.front().n();
  double d_max = 0.0;
  for (const auto& g : trace) d_max = std::max(d_max, max_in_degree(g));
  const auto [k_i, k_t] = k_indices(schedule, i, t);
  auto gain_checked = [&](std::int64_t s) {
    const double a = gain_value(gains, s);
    if (!(a > 0.0 && a * d_max < 1.0)) throw std::domain_error("lemma1_check: gain outside (0, 1/d_max)");
    return a;
  };
  // lhs
  Vector x = z, next(n), zero = Vector::Zero(n);
  for (std::int64_t s = i + 1; s <= t; ++s) {
    step_into(x, trace[static_cast<std::size_t>(s - 1)], gain_checked(s), zero, next);
    x.swap(next);
  }
  BoundCheck out;
  out.lhs = disagreement(x);
  const double vz = disagreement(z);
  double prod = 1.0;
  const double nd = n;
  for (int l = k_i; l <= k_t - 1; ++l) {
    const std::int64_t lo = schedule.times[static_cast<std::size_t>(l - 1)], hi = schedule.times[static_cast<std::size_t>(l)];
    double dl = std::numeric_limits<double>::infinity(), el = std::numeric_limits<double>::infinity();
    for (std::int64_t s = lo; s < hi; ++s) {
      const double a = gain_checked(s);
      dl = std::min(dl, a);
      el = std::min(el, 1.0 - a * d_max);
    }
    prod *= 1.0 - dl * (1.0 - dl) * (1.0 - dl) * el / (nd * (nd - 1.0) * (nd - 1.0));
  }
  out.rhs = vz * prod;
  out.holds = out.lhs <= out.rhs + kCheckRelTol * std::max({vz, out.rhs, out.lhs});
  return out;
}

// V((I - aL)x) >= (1 - a lambda_max(L + L')) V(x).
[[nodiscard]] inline BoundCheck lemma6_check(const WeightedDigraph& g, double a, const Vector& x) {
  if (a < 0.0) throw std::invalid_argument("lemma6_check: a must be >= 0");
  Vector y;
  step_into(x, g, a, Vector::Zero(g.n()), y);
  BoundCheck out;
  out.lhs = disagreement(y);
  const double vx = disagreement(x);
  out.rhs = (1.0 - a * lambda_max_sym_laplacian(g)) * vx;
  out.holds = out.lhs >= out.rhs - kCheckRelTol * std::max({vx, std::abs(out.rhs), out.lhs});
  return out;
}

// I - aL nonnegative with unit row and column sums.
[[nodiscard]] inline bool is_doubly_stochastic(const Matrix& A, double tol = 1e-12) {
  if ((A.array() < -tol).any()) return false;
  const Vector ones = Vector::Ones(A.rows());
  return ((A * ones - ones).cwiseAbs().maxCoeff() <= tol) && ((A.transpose() * ones - ones).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace conslab
