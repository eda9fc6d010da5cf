#pragma once

// Open-loop gain schedules a(t), t >= 1.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace conslab {

enum class GainKind { constant, power, log_corrected, table };

struct GainSchedule {
  GainKind kind = GainKind::power;
  double alpha = 1.0;
  double t_star = 0.0;
  double exponent = 1.0;
  // power kind: a(t) = alpha / ((t + shift)^exponent + t_star). shift = 0
  // gives alpha / (t^exponent + t*); shift > 0 with t* = 0 gives forms like
  // 1 / (t + 30)^0.99.
  double shift = 0.0;
  std::vector<double> table;  // table[t - 1]

  static GainSchedule constant(double a) { return {GainKind::constant, a, 0.0, 0.0, 0.0, {}}; }
  static GainSchedule power(double alpha, double exponent, double t_star = 0.0, double shift = 0.0) {
    return {GainKind::power, alpha, t_star, exponent, shift, {}};
  }
  static GainSchedule log_corrected(double alpha, double t_star) {
    return {GainKind::log_corrected, alpha, t_star, 0.5, 0.0, {}};
  }
  static GainSchedule from_table(std::vector<double> values) {
    return {GainKind::table, 0.0, 0.0, 0.0, 0.0, std::move(values)};
  }
};

[[nodiscard]] inline double gain_value(const GainSchedule& s, std::int64_t t) {
  if (t < 1) throw std::out_of_range("gain index t must be >= 1");
  const auto td = static_cast<double>(t);
  switch (s.kind) {
    case GainKind::constant:
      return s.alpha;
    case GainKind::power:
      return s.alpha / (std::pow(td + s.shift, s.exponent) + s.t_star);
    case GainKind::log_corrected: {
      const double lg = std::log(td + s.t_star);
      if (!(lg > 0.0)) throw std::domain_error("log-corrected gain undefined where t + t* <= 1");
      return s.alpha / ((std::sqrt(td) + s.t_star) * lg);
    }
    case GainKind::table:
      if (static_cast<std::size_t>(t) > s.table.size()) throw std::out_of_range("t beyond gain table");
      return s.table[static_cast<std::size_t>(t - 1)];
  }
  throw std::logic_error("unknown gain kind");
}

// Gain design guaranteeing unbiased mean square consensus under extensible
// joint connectivity with exponent delta and constant c:
//   delta < 1/2 : alpha/(t^{1-delta} + t*),          alpha = 32 n (n-1)^4 c / (2n-3)^2
//   delta = 1/2 : alpha/((sqrt t + t*) log(t + t*)),  alpha = 64 n (n-1)^4 c / (2n-3)^2
// with t* = floor(2 alpha (n-1) a_max) in both cases.
[[nodiscard]] inline GainSchedule theorem1_gain(int n, double c, double a_max, double delta) {
  if (n < 2) throw std::invalid_argument("theorem1_gain: n must be >= 2");
  if (c < 1.0) throw std::invalid_argument("theorem1_gain: c must be >= 1");
  if (a_max < 1.0) throw std::invalid_argument("theorem1_gain: a_max must be >= 1");
  if (delta < 0.0) throw std::invalid_argument("theorem1_gain: delta must be >= 0");
  if (delta > 0.5) throw std::domain_error("theorem1_gain: no consensus guarantee exists for delta > 1/2");
  const double nd = n;
  const double base = nd * std::pow(nd - 1.0, 4) * c / ((2.0 * nd - 3.0) * (2.0 * nd - 3.0));
  const bool critical = delta == 0.5;
  const double alpha = (critical ? 64.0 : 32.0) * base;
  const double t_star = std::floor(2.0 * alpha * (nd - 1.0) * a_max);
  if (critical) return GainSchedule::log_corrected(alpha, t_star);
  return GainSchedule::power(alpha, 1.0 - delta, t_star);
}

inline std::string to_string(GainKind k) {
  switch (k) {
    case GainKind::constant: return "constant";
    case GainKind::power: return "power";
    case GainKind::log_corrected: return "log_corrected";
    case GainKind::table: return "table";
  }
  return "?";
}

}  // namespace conslab
