#pragma once

// Deterministic SVG line charts from CSV artifacts.

#include "conslab/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conslab::cli {

enum class PlotKind { loglog_V, states, positions };

[[nodiscard]] inline std::optional<PlotKind> plot_kind_named(std::string_view s) {
  if (s == "loglog_V") return PlotKind::loglog_V;
  if (s == "states") return PlotKind::states;
  if (s == "positions") return PlotKind::positions;
  return std::nullopt;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  bool mark_first = false;  // circle at each series' first point
};

namespace detail {

inline constexpr double kWidth = 720, kHeight = 480, kLeft = 80, kRight = 24, kTop = 40, kBottom = 60;
inline constexpr std::size_t kMaxPoints = 1500;
inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline std::string num(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Keeps the first and last points and thins the rest: evenly in log x for
// increasing x on a log axis, by index stride otherwise.
inline std::vector<std::pair<double, double>> thin(const std::vector<std::pair<double, double>>& pts, bool log_x) {
  if (pts.size() <= kMaxPoints) return pts;
  std::vector<std::pair<double, double>> out;
  if (!log_x) {
    const std::size_t stride = (pts.size() + kMaxPoints - 1) / kMaxPoints;
    for (std::size_t k = 0; k < pts.size(); k += stride) out.push_back(pts[k]);
    if (out.back() != pts.back()) out.push_back(pts.back());
    return out;
  }
  const double lo = std::log10(pts.front().first), hi = std::log10(pts.back().first);
  const double cell = (hi - lo) / static_cast<double>(kMaxPoints);
  double last_bucket = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double bucket = cell > 0 ? std::floor((std::log10(pts[k].first) - lo) / cell) : static_cast<double>(k);
    if (k == 0 || k + 1 == pts.size() || bucket > last_bucket) {
      out.push_back(pts[k]);
      last_bucket = bucket;
    }
  }
  return out;
}

inline std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return out;
}

}  // namespace detail

[[nodiscard]] inline std::string render_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  using namespace detail;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  std::vector<Series> kept;
  for (const auto& s : series) {
    Series t{s.label, {}};
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((spec.log_x && x <= 0) || (spec.log_y && y <= 0)) continue;
      t.points.emplace_back(x, y);
    }
    t.points = thin(t.points, spec.log_x);
    for (const auto& [x, y] : t.points) {
      const double tx = spec.log_x ? std::log10(x) : x, ty = spec.log_y ? std::log10(y) : y;
      xlo = std::min(xlo, tx), xhi = std::max(xhi, tx), ylo = std::min(ylo, ty), yhi = std::max(yhi, ty);
    }
    kept.push_back(std::move(t));
  }
  if (!std::isfinite(xlo)) throw std::invalid_argument("nothing to plot");
  if (spec.log_x) xlo = std::floor(xlo), xhi = std::max(std::ceil(xhi), xlo + 1);
  if (spec.log_y) ylo = std::floor(ylo), yhi = std::max(std::ceil(yhi), ylo + 1);
  if (xhi == xlo) xlo -= 0.5, xhi += 0.5;
  if (yhi == ylo) ylo -= 0.5, yhi += 0.5;
  if (!spec.log_y) {
    const double pad = 0.04 * (yhi - ylo);
    ylo -= pad, yhi += pad;
  }
  if (!spec.log_x && spec.mark_first) {
    const double pad = 0.04 * (xhi - xlo);
    xlo -= pad, xhi += pad;
  }
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ((spec.log_x ? std::log10(x) : x) - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return kTop + ph - ((spec.log_y ? std::log10(y) : y) - ylo) / (yhi - ylo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" viewBox=\"0 0 "
     << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [&](double lo, double hi, bool log) {
    std::vector<std::pair<double, std::string>> out;
    if (log) {
      const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 8.0)));
      for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += step) out.emplace_back(std::pow(10.0, e), "1e" + std::to_string(e));
    } else {
      for (double v : linear_ticks(lo, hi)) out.emplace_back(v, num("%.4g", v));
    }
    return out;
  };
  for (const auto& [v, label] : ticks(xlo, xhi, spec.log_x)) {
    const double x = px(v);
    os << "<line x1=\"" << num("%.2f", x) << "\" y1=\"" << kTop + ph << "\" x2=\"" << num("%.2f", x) << "\" y2=\"" << kTop + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num("%.2f", x) << "\" y=\"" << kTop + ph + 19 << "\" text-anchor=\"middle\">" << label << "</text>\n";
  }
  for (const auto& [v, label] : ticks(ylo, yhi, spec.log_y)) {
    const double y = py(v);
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num("%.2f", y) << "\" x2=\"" << kLeft << "\" y2=\"" << num("%.2f", y)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << num("%.2f", y + 4) << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">" << escape(spec.x_label)
     << "</text>\n";
  os << "<text x=\"20\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << kTop + ph / 2
     << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < kept.size(); ++k) {
    const auto& s = kept[k];
    if (s.points.empty()) continue;
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t m = 0; m < s.points.size(); ++m)
      os << (m ? " " : "") << num("%.2f", px(s.points[m].first)) << ',' << num("%.2f", py(s.points[m].second));
    os << "\"><title>" << escape(s.label) << "</title></polyline>\n";
    if (spec.mark_first) {
      const double cx = px(s.points.front().first), cy = py(s.points.front().second);
      os << "<circle cx=\"" << num("%.2f", cx) << "\" cy=\"" << num("%.2f", cy) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
      os << "<text x=\"" << num("%.2f", cx + 6) << "\" y=\"" << num("%.2f", cy - 6) << "\">" << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

// Builds the chart for a CSV artifact; throws invalid_argument when the
// CSV schema does not fit the kind.
[[nodiscard]] inline std::string plot_csv(const CsvTable& t, PlotKind kind) {
  std::vector<Series> series;
  ChartSpec spec;
  switch (kind) {
    case PlotKind::loglog_V: {
      const auto tc = t.find_column("t");
      auto vc = t.find_column("meanV");
      if (!vc) vc = t.find_column("V");
      if (!tc || !vc) throw std::invalid_argument("loglog_V needs columns t and V (or meanV)");
      Series s{t.header[*vc], {}};
      for (const auto& r : t.rows) s.points.emplace_back(r.at(*tc), r.at(*vc));
      series.push_back(std::move(s));
      spec = {"disagreement V(x(t))", "t", t.header[*vc], true, true, false};
      break;
    }
    case PlotKind::states: {
      const auto tc = t.find_column("t");
      if (!tc) throw std::invalid_argument("states needs a t column");
      for (std::size_t k = 0; k < t.header.size(); ++k) {
        if (t.header[k].rfind("x_", 0) != 0) continue;
        Series s{t.header[k], {}};
        for (const auto& r : t.rows) s.points.emplace_back(r.at(*tc), r.at(k));
        series.push_back(std::move(s));
      }
      if (series.empty()) throw std::invalid_argument("states needs x_1..x_n columns");
      spec = {"agent states", "t", "state", false, false, false};
      break;
    }
    case PlotKind::positions: {
      const auto lc = t.find_column("l"), ac = t.find_column("agent"), xc = t.find_column("px"), yc = t.find_column("py");
      if (!lc || !ac || !xc || !yc) throw std::invalid_argument("positions needs columns l, agent, px, py");
      std::map<int, Series> by_agent;
      for (const auto& r : t.rows) {
        const int a = static_cast<int>(r.at(*ac));
        auto& s = by_agent[a];
        s.label = std::to_string(a);
        s.points.emplace_back(r.at(*xc), r.at(*yc));
      }
      for (auto& [a, s] : by_agent) series.push_back(std::move(s));
      spec = {"agent positions (initial layout marked)", "x (km)", "y (km)", false, false, true};
      break;
    }
  }
  return render_chart(spec, series);
}

inline void emit_plot(const std::filesystem::path& csv_path, PlotKind kind, const std::filesystem::path& svg_path) {
  const auto svg = plot_csv(read_csv(csv_path), kind);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + svg_path.string() + "'");
  out << svg;
}

}  // namespace conslab::cli
