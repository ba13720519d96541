#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace lp::cli::svg {
namespace {

constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 50.0;
constexpr double kLegendWidth = 70.0;

const std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
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
  bool valid() const { return lo <= hi; }
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2.0 * mag;
  if (r < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

std::vector<double> linear_ticks(Range& r) {
  if (!r.valid()) r = {0.0, 1.0};
  if (r.hi == r.lo) {
    const double pad = r.lo == 0.0 ? 1.0 : std::abs(r.lo) * 0.1;
    r.lo -= pad;
    r.hi += pad;
  }
  const double step = nice_step(r.hi - r.lo, 5);
  std::vector<double> ticks;
  const long first = static_cast<long>(std::ceil(r.lo / step - 1e-9));
  const long last = static_cast<long>(std::floor(r.hi / step + 1e-9));
  for (long k = first; k <= last; ++k) ticks.push_back(k == 0 ? 0.0 : k * step);
  return ticks;
}

/// Decade ticks; the range is widened to whole decades.
std::vector<double> log_ticks(Range& r) {
  if (!r.valid() || r.hi <= 0.0) r = {1e-3, 1.0};
  if (r.lo <= 0.0) r.lo = r.hi * 1e-6;
  int lo = static_cast<int>(std::floor(std::log10(r.lo)));
  int hi = static_cast<int>(std::ceil(std::log10(r.hi)));
  if (hi == lo) ++hi;
  r.lo = std::pow(10.0, lo);
  r.hi = std::pow(10.0, hi);
  std::vector<double> ticks;
  const int stride = std::max(1, (hi - lo + 7) / 8);
  for (int e = lo; e <= hi; e += stride) ticks.push_back(std::pow(10.0, e));
  return ticks;
}

struct Axes {
  Frame frame;
  Range x;
  Range y;
  bool log_y = false;
  double right_reserve = 0.0;

  double left() const { return frame.x + kMarginLeft; }
  double right() const { return frame.x + frame.width - kMarginRight - right_reserve; }
  double top() const { return frame.y + kMarginTop; }
  double bottom() const { return frame.y + frame.height - kMarginBottom; }

  double px(double v) const { return left() + (v - x.lo) / (x.hi - x.lo) * (right() - left()); }
  double py(double v) const {
    double t = log_y ? (std::log10(v) - std::log10(y.lo)) / (std::log10(y.hi) - std::log10(y.lo))
                     : (v - y.lo) / (y.hi - y.lo);
    return bottom() - t * (bottom() - top());
  }
};

void draw_axes(std::ostringstream& o, const Axes& a, const std::vector<double>& xt, const std::vector<double>& yt,
               const std::string& title, const std::string& xl, const std::string& yl) {
  o << "<rect x=\"" << num(a.left()) << "\" y=\"" << num(a.top()) << "\" width=\"" << num(a.right() - a.left())
    << "\" height=\"" << num(a.bottom() - a.top()) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  o << "<g class=\"x-ticks\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (double t : xt) {
    const double x = a.px(t);
    o << "<line class=\"xtick\" data-value=\"" << label(t) << "\" x1=\"" << num(x) << "\" y1=\"" << num(a.bottom())
      << "\" x2=\"" << num(x) << "\" y2=\"" << num(a.bottom() + 5) << "\" stroke=\"#333\"/>";
    o << "<text x=\"" << num(x) << "\" y=\"" << num(a.bottom() + 18) << "\">" << label(t) << "</text>\n";
  }
  o << "</g>\n";
  o << "<g class=\"y-ticks\" data-scale=\"" << (a.log_y ? "log" : "linear")
    << "\" font-size=\"11\" text-anchor=\"end\">\n";
  for (double t : yt) {
    const double y = a.py(t);
    o << "<line class=\"ytick\" data-value=\"" << label(t) << "\" x1=\"" << num(a.left() - 5) << "\" y1=\"" << num(y)
      << "\" x2=\"" << num(a.left()) << "\" y2=\"" << num(y) << "\" stroke=\"#333\"/>";
    o << "<text x=\"" << num(a.left() - 8) << "\" y=\"" << num(y + 4) << "\">" << label(t) << "</text>\n";
  }
  o << "</g>\n";
  const double cx = (a.left() + a.right()) / 2.0;
  o << "<text class=\"title\" x=\"" << num(cx) << "\" y=\"" << num(a.frame.y + 20)
    << "\" font-size=\"14\" text-anchor=\"middle\">" << escape(title) << "</text>\n";
  o << "<text class=\"x-label\" x=\"" << num(cx) << "\" y=\"" << num(a.frame.y + a.frame.height - 12)
    << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(xl) << "</text>\n";
  const double cy = (a.top() + a.bottom()) / 2.0;
  const double lx = a.frame.x + 16;
  o << "<text class=\"y-label\" x=\"" << num(lx) << "\" y=\"" << num(cy) << "\" font-size=\"12\" text-anchor=\"middle\""
    << " transform=\"rotate(-90 " << num(lx) << " " << num(cy) << ")\">" << escape(yl) << "</text>\n";
}

}  // namespace

std::string ramp_color(double t) {
  static const std::array<std::array<double, 3>, 5> stops = {{
      {68, 1, 84},
      {59, 82, 139},
      {33, 145, 140},
      {94, 201, 98},
      {253, 231, 37},
  }};
  if (!std::isfinite(t)) return "#bbbbbb";
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * (stops.size() - 1);
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(pos), stops.size() - 2);
  const double f = pos - k;
  char buf[8];
  int c[3];
  for (int i = 0; i < 3; ++i) {
    c[i] = static_cast<int>(std::lround(stops[k][i] + f * (stops[k + 1][i] - stops[k][i])));
  }
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string line_plot(const std::vector<Series>& series, const PlotOptions& options, const Frame& frame) {
  Axes a;
  a.frame = frame;
  a.log_y = options.log_y;
  for (const auto& s : series) {
    for (double v : s.x) a.x.add(v);
    for (double v : s.y) {
      if (!options.log_y || v > 0.0) a.y.add(v);
    }
  }
  for (const auto& h : options.hlines) {
    if (!options.log_y || h.y > 0.0) a.y.add(h.y);
  }
  const auto xt = linear_ticks(a.x);
  const auto yt = options.log_y ? log_ticks(a.y) : linear_ticks(a.y);

  std::ostringstream o;
  o << "<g class=\"plot\">\n";
  draw_axes(o, a, xt, yt, options.title, options.x_label, options.y_label);
  std::size_t index = 0;
  for (const auto& s : series) {
    const std::string color = s.color.empty() ? kPalette[index % kPalette.size()] : s.color;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    auto drawable = [&](std::size_t k) {
      return std::isfinite(s.x[k]) && std::isfinite(s.y[k]) && (!options.log_y || s.y[k] > 0.0);
    };
    o << "<g class=\"series\" data-name=\"" << escape(s.name) << "\">\n";
    if (s.line) {
      std::string points;
      auto flush = [&] {
        if (!points.empty()) {
          o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points
            << "\"/>\n";
        }
        points.clear();
      };
      for (std::size_t k = 0; k < n; ++k) {
        if (!drawable(k)) {
          flush();
          continue;
        }
        if (!points.empty()) points += ' ';
        points += num(a.px(s.x[k])) + "," + num(a.py(s.y[k]));
      }
      flush();
    }
    if (s.markers) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!drawable(k)) continue;
        o << "<circle class=\"point\" cx=\"" << num(a.px(s.x[k])) << "\" cy=\"" << num(a.py(s.y[k]))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
      }
    }
    o << "</g>\n";
    ++index;
  }
  for (const auto& h : options.hlines) {
    if (options.log_y && h.y <= 0.0) continue;
    const double y = a.py(h.y);
    o << "<line class=\"hline\" data-value=\"" << label(h.y) << "\" x1=\"" << num(a.left()) << "\" y1=\"" << num(y)
      << "\" x2=\"" << num(a.right()) << "\" y2=\"" << num(y) << "\" stroke=\"#555\" stroke-dasharray=\"5,4\"/>\n";
    o << "<text x=\"" << num(a.right() - 4) << "\" y=\"" << num(y - 4)
      << "\" font-size=\"11\" text-anchor=\"end\">" << escape(h.label) << "</text>\n";
  }
  if (series.size() > 1) {
    o << "<g class=\"legend\" font-size=\"11\">\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
      const std::string color = series[k].color.empty() ? kPalette[k % kPalette.size()] : series[k].color;
      const double y = a.top() + 14 + 16 * k;
      o << "<rect x=\"" << num(a.right() - 120) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
        << color << "\"/><text x=\"" << num(a.right() - 105) << "\" y=\"" << num(y) << "\">"
        << escape(series[k].name) << "</text>\n";
    }
    o << "</g>\n";
  }
  o << "</g>\n";
  return o.str();
}

std::string heatmap(const SurfaceGrid& grid, const HeatmapOptions& options, const Frame& frame) {
  Axes a;
  a.frame = frame;
  a.right_reserve = kLegendWidth;
  const std::size_t nx = grid.x.size();
  const std::size_t ny = grid.y.size();
  // Cell edges halfway between samples.
  auto edges = [](const std::vector<double>& v) {
    std::vector<double> e(v.size() + 1);
    if (v.size() == 1) {
      e[0] = v[0] - 0.5;
      e[1] = v[0] + 0.5;
      return e;
    }
    for (std::size_t k = 1; k < v.size(); ++k) e[k] = 0.5 * (v[k - 1] + v[k]);
    e.front() = v.front() - (e[1] - v.front());
    e.back() = v.back() + (v.back() - e[v.size() - 1]);
    return e;
  };
  const auto ex = edges(grid.x);
  const auto ey = edges(grid.y);
  a.x = {ex.front(), ex.back()};
  a.y = {ey.front(), ey.back()};
  Range vr;
  for (double v : grid.values) vr.add(v);
  if (!vr.valid()) vr = {0.0, 1.0};
  const double vspan = vr.hi > vr.lo ? vr.hi - vr.lo : 1.0;

  std::ostringstream o;
  o << "<g class=\"heatmap\">\n<g class=\"cells\" shape-rendering=\"crispEdges\">\n";
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double x0 = a.px(ex[i]);
      const double x1 = a.px(ex[i + 1]);
      const double y0 = a.py(ey[j + 1]);
      const double y1 = a.py(ey[j]);
      o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\"" << num(x1 - x0) << "\" height=\""
        << num(y1 - y0) << "\" fill=\"" << ramp_color((grid.at(i, j) - vr.lo) / vspan) << "\"/>\n";
    }
  }
  o << "</g>\n";
  Range xr = a.x;
  Range yr = a.y;
  auto xt = linear_ticks(xr);
  auto yt = linear_ticks(yr);
  std::erase_if(xt, [&](double t) { return t < a.x.lo || t > a.x.hi; });
  std::erase_if(yt, [&](double t) { return t < a.y.lo || t > a.y.hi; });
  draw_axes(o, a, xt, yt, options.title, grid.x_label, grid.y_label);

  if (!grid.reference_curve.empty()) {
    o << "<g class=\"reference\">\n";
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        o << "<polyline class=\"manifold\" fill=\"none\" stroke=\"#ffffff\" stroke-width=\"1.5\" "
             "stroke-dasharray=\"6,3\" points=\""
          << points << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t k = 0; k < grid.reference_curve.size(); ++k) {
      const auto& p = grid.reference_curve[k];
      if (k > 0 && (std::signbit(p[0]) != std::signbit(grid.reference_curve[k - 1][0]))) flush();
      if (!points.empty()) points += ' ';
      points += num(a.px(p[0])) + "," + num(a.py(p[1]));
    }
    flush();
    o << "</g>\n";
  }
  if (!grid.overlay.empty()) {
    o << "<g class=\"trajectory\">\n";
    std::string path;
    for (const auto& p : grid.overlay) {
      if (!path.empty()) path += ' ';
      path += num(a.px(p.x)) + "," + num(a.py(p.y));
    }
    o << "<polyline fill=\"none\" stroke=\"#ffffff\" stroke-width=\"1\" stroke-opacity=\"0.7\" points=\"" << path
      << "\"/>\n";
    for (const auto& p : grid.overlay) {
      o << "<circle class=\"overlay\" data-step=\"" << p.step << "\" cx=\"" << num(a.px(p.x)) << "\" cy=\""
        << num(a.py(p.y)) << "\" r=\"3\" fill=\"#ff4040\" stroke=\"#ffffff\" stroke-width=\"0.8\"/>\n";
    }
    o << "</g>\n";
  }

  const double lx = a.right() + 18;
  const double lw = 16;
  const double top = a.top();
  const double bottom = a.bottom();
  constexpr int kBands = 64;
  o << "<g class=\"color-legend\" data-min=\"" << label(vr.lo) << "\" data-max=\"" << label(vr.hi)
    << "\" shape-rendering=\"crispEdges\">\n";
  const double bh = (bottom - top) / kBands;
  for (int k = 0; k < kBands; ++k) {
    const double t = (k + 0.5) / kBands;
    o << "<rect x=\"" << num(lx) << "\" y=\"" << num(bottom - (k + 1) * bh) << "\" width=\"" << num(lw)
      << "\" height=\"" << num(bh + 0.5) << "\" fill=\"" << ramp_color(t) << "\"/>\n";
  }
  o << "<rect x=\"" << num(lx) << "\" y=\"" << num(top) << "\" width=\"" << num(lw) << "\" height=\""
    << num(bottom - top) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  o << "<text x=\"" << num(lx + lw + 4) << "\" y=\"" << num(top + 10) << "\" font-size=\"10\">" << label(vr.hi)
    << "</text>\n";
  o << "<text x=\"" << num(lx + lw + 4) << "\" y=\"" << num(bottom) << "\" font-size=\"10\">" << label(vr.lo)
    << "</text>\n";
  o << "<text x=\"" << num(lx) << "\" y=\"" << num(top - 6) << "\" font-size=\"11\">J</text>\n";
  o << "</g>\n</g>\n";
  return o.str();
}

std::string document(const std::vector<std::string>& parts, double width, double height) {
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\"sans-serif\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (const auto& p : parts) o << p;
  o << "</svg>\n";
  return o.str();
}

std::vector<Frame> panel_frames(std::size_t count, std::size_t columns, double cell_width, double cell_height) {
  std::vector<Frame> frames;
  for (std::size_t k = 0; k < count; ++k) {
    frames.push_back({static_cast<double>(k % columns) * cell_width, static_cast<double>(k / columns) * cell_height,
                      cell_width, cell_height});
  }
  return frames;
}

}  // namespace lp::cli::svg
