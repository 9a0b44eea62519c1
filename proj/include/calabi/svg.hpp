#ifndef CALABI_SVG_HPP
#define CALABI_SVG_HPP

// Minimal deterministic SVG line and bar charts. Coordinates are printed in
// fixed point with two decimals, so identical data gives identical bytes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "calabi/curvature.hpp"
#include "calabi/error.hpp"
#include "calabi/radial_ode.hpp"
#include "calabi/symplectic_map.hpp"
#include "calabi/text_format.hpp"

namespace calabi::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct VerticalMarker {
  double x;
  std::string label;
};

struct Bars {
  std::vector<double> edges;  // counts.size() + 1 entries
  std::vector<double> counts;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::vector<VerticalMarker> markers;
  Bars bars;
  // Axis ranges; NaN means fit to data.
  double x_min = std::numeric_limits<double>::quiet_NaN();
  double x_max = std::numeric_limits<double>::quiet_NaN();
  double y_min = std::numeric_limits<double>::quiet_NaN();
  double y_max = std::numeric_limits<double>::quiet_NaN();
};

inline constexpr double panel_width = 560.0;
inline constexpr double panel_height = 380.0;

namespace detail {

inline std::string num(double v) { return format_fixed(v, 2); }

inline std::string tick_label(double v) {
  if (std::abs(v) < 1e-12) return "0";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish(double fixed_lo, double fixed_hi) {
    if (!std::isnan(fixed_lo)) lo = fixed_lo;
    if (!std::isnan(fixed_hi)) hi = fixed_hi;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi <= lo) {
      const double pad = lo == 0.0 ? 1.0 : 0.5 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

inline void render_panel(std::ostream& out, const Panel& p, double ox, double oy) {
  constexpr double left = 70, right = 20, top = 36, bottom = 50;
  const double w = panel_width - left - right;
  const double h = panel_height - top - bottom;

  Range xr, yr;
  for (const auto& s : p.series) {
    for (double v : s.x) xr.add(v);
    for (double v : s.y) yr.add(v);
  }
  for (const auto& m : p.markers) xr.add(m.x);
  if (!p.bars.counts.empty()) {
    for (double e : p.bars.edges) xr.add(e);
    yr.add(0.0);
    for (double c : p.bars.counts) yr.add(c);
  }
  xr.finish(p.x_min, p.x_max);
  yr.finish(p.y_min, p.y_max);

  auto px = [&](double v) { return ox + left + (v - xr.lo) / (xr.hi - xr.lo) * w; };
  auto py = [&](double v) { return oy + top + h - (v - yr.lo) / (yr.hi - yr.lo) * h; };
  auto clamp_y = [&](double v) { return std::clamp(v, yr.lo, yr.hi); };

  out << "<g>\n";
  out << "<text x=\"" << num(ox + panel_width / 2) << "\" y=\"" << num(oy + 22)
      << "\" text-anchor=\"middle\" font-size=\"15\">" << escape(p.title) << "</text>\n";
  out << "<rect x=\"" << num(ox + left) << "\" y=\"" << num(oy + top) << "\" width=\""
      << num(w) << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"#000\"/>\n";

  constexpr int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double xv = xr.lo + (xr.hi - xr.lo) * i / ticks;
    const double yv = yr.lo + (yr.hi - yr.lo) * i / ticks;
    out << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(oy + top + h) << "\" x2=\""
        << num(px(xv)) << "\" y2=\"" << num(oy + top + h + 5) << "\" stroke=\"#000\"/>"
        << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(oy + top + h + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(xv) << "</text>\n";
    out << "<line x1=\"" << num(ox + left - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
        << num(ox + left) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"#000\"/>"
        << "<text x=\"" << num(ox + left - 8) << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(yv) << "</text>\n";
  }
  out << "<text x=\"" << num(ox + left + w / 2) << "\" y=\"" << num(oy + panel_height - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.x_label) << "</text>\n";
  out << "<text x=\"" << num(ox + 16) << "\" y=\"" << num(oy + top + h / 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << num(ox + 16)
      << ' ' << num(oy + top + h / 2) << ")\">" << escape(p.y_label) << "</text>\n";

  for (std::size_t i = 0; i < p.bars.counts.size(); ++i) {
    const double x0 = px(p.bars.edges[i]), x1 = px(p.bars.edges[i + 1]);
    const double y1 = py(clamp_y(p.bars.counts[i])), y0 = py(clamp_y(0.0));
    out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\"" << num(x1 - x0)
        << "\" height=\"" << num(y0 - y1) << "\" fill=\"#4c72b0\" stroke=\"#fff\"/>\n";
  }

  double legend_y = oy + top + 16;
  for (const auto& s : p.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << " points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!first) out << ' ';
      first = false;
      out << num(px(s.x[i])) << ',' << num(py(clamp_y(s.y[i])));
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      out << "<text x=\"" << num(ox + left + 10) << "\" y=\"" << num(legend_y)
          << "\" font-size=\"11\" fill=\"" << s.color << "\">" << escape(s.label)
          << "</text>\n";
      legend_y += 14;
    }
  }
  for (const auto& m : p.markers) {
    out << "<line x1=\"" << num(px(m.x)) << "\" y1=\"" << num(oy + top) << "\" x2=\""
        << num(px(m.x)) << "\" y2=\"" << num(oy + top + h)
        << "\" stroke=\"#c44e52\" stroke-dasharray=\"4 3\"/>"
        << "<text x=\"" << num(px(m.x) - 4) << "\" y=\"" << num(oy + top + 14)
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#c44e52\">" << escape(m.label)
        << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace detail

/// Panels laid out left to right in one standalone document.
inline std::string render(const std::vector<Panel>& panels) {
  std::ostringstream out;
  const double width = panel_width * static_cast<double>(panels.size());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::num(width)
      << "\" height=\"" << detail::num(panel_height) << "\" viewBox=\"0 0 "
      << detail::num(width) << ' ' << detail::num(panel_height)
      << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    detail::render_panel(out, panels[i], panel_width * static_cast<double>(i), 0.0);
  out << "</svg>\n";
  return out.str();
}

// ---- plots built from a profile -----------------------------------------

struct ProfilePlotData {
  std::vector<double> r;
  std::vector<double> Y;
  std::vector<double> Yp;
  std::vector<double> grad_norm;  // |grad f| at |x| = r
};

/// count equally spaced radii from 0 to r_max inclusive.
inline ProfilePlotData profile_plot_data(const RadialProfile& profile, int count) {
  if (count < 2) throw Error(ErrorCode::invalid_params, "plot needs at least 2 points");
  ProfilePlotData d;
  const double R = profile.r_max();
  for (int k = 0; k < count; ++k) {
    const double r = k == count - 1 ? R : R * k / (count - 1);
    const RadialState s = profile.eval(r);
    d.r.push_back(r);
    d.Y.push_back(s.Y);
    d.Yp.push_back(s.Yp);
  }
  std::vector<double> fractions;
  for (int k = 0; k < count; ++k) fractions.push_back(k == count - 1 ? 1.0 : double(k) / (count - 1));
  for (const auto& row : properness_table(profile, fractions)) d.grad_norm.push_back(row.grad_norm);
  return d;
}

inline std::string plot_Y(const RadialProfile& profile, const ProfilePlotData& d) {
  Panel p;
  p.title = "Y(r), n = " + std::to_string(profile.n()) + ", y0 = " + format_double(profile.y0());
  p.x_label = "r";
  p.y_label = "Y";
  p.series.push_back({"Y(r)", "#4c72b0", d.r, d.Y});
  p.x_min = 0.0;
  return render({p});
}

inline std::string plot_Yp(const RadialProfile& profile, const ProfilePlotData& d) {
  Panel p;
  p.title = "Y'(r) with blow-up radius";
  p.x_label = "r";
  p.y_label = "Y'";
  p.series.push_back({"Y'(r)", "#4c72b0", d.r, d.Yp});
  p.markers.push_back({profile.a_est(), "a_est = " + detail::tick_label(profile.a_est())});
  p.x_min = 0.0;
  p.x_max = profile.a_est() * 1.02;
  p.y_min = 0.0;
  return render({p});
}

inline std::string plot_properness(const RadialProfile& profile, const ProfilePlotData& d) {
  Panel p;
  p.title = "log10(1 + |grad f|) against |x|";
  p.x_label = "|x|";
  p.y_label = "log10(1 + |grad f|)";
  std::vector<double> logs;
  for (double g : d.grad_norm) logs.push_back(std::log10(1.0 + g));
  p.series.push_back({"|grad f|", "#55a868", d.r, logs});
  const double threshold = std::log10(1.0 + profile.params().blowup_threshold);
  p.series.push_back({"blowup_threshold", "#c44e52", {0.0, profile.r_max()},
                      {threshold, threshold}, true});
  p.x_min = 0.0;
  p.y_min = 0.0;
  return render({p});
}

/// Histogram of K beside K(r) along three fixed plane families.
inline std::string plot_curvature(const CurvatureScan& scan,
                                  const std::vector<RadialCurvatureRow>& rows) {
  Panel hist;
  hist.title = "sectional curvature histogram (seed " + std::to_string(scan.seed) + ")";
  hist.x_label = "K";
  hist.y_label = "count";
  hist.bars.edges = scan.summary.edges;
  for (auto c : scan.summary.counts) hist.bars.counts.push_back(static_cast<double>(c));

  Panel line;
  line.title = "K(r) along x = r e1";
  line.x_label = "r";
  line.y_label = "K";
  Series a{"complex radial line", "#4c72b0", {}, {}};
  Series b{"radial-tangential plane", "#55a868", {}, {}};
  Series c{"complex tangential line", "#c44e52", {}, {}};
  for (const auto& row : rows) {
    a.x.push_back(row.r);
    a.y.push_back(row.radial_complex);
    b.x.push_back(row.r);
    b.y.push_back(row.radial_tangential);
    c.x.push_back(row.r);
    c.y.push_back(row.tangential_complex);
  }
  line.series = {a, b, c};
  return render({hist, line});
}

}  // namespace calabi::svg

#endif  // CALABI_SVG_HPP
