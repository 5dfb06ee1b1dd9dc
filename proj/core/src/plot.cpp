#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "kslab/error.hpp"
#include "kslab/numeric.hpp"
#include "kslab/report.hpp"

namespace kslab {

namespace {

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string tick_label(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

struct Axis {
  double lo, hi;
  bool log;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
};

Axis make_axis(std::vector<double> v, bool log) {
  if (log) {
    for (double& x : v) x = std::log10(x);
  }
  double lo = *std::min_element(v.begin(), v.end());
  double hi = *std::max_element(v.begin(), v.end());
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(0.5, 0.1 * std::abs(hi));
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string emit_plot(const std::vector<PlotSeries>& series, const PlotStyle& style) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) fail(Errc::invalid_argument, "emit_plot: x and y lengths differ in " + s.label);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((style.logx && !(s.x[i] > 0.0)) || (style.logy && !(s.y[i] > 0.0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xs.push_back(s.x[i]);
      ys.push_back(s.y[i]);
    }
  }
  if (xs.empty()) fail(Errc::empty_series, "emit_plot: nothing to draw");
  const Axis ax = make_axis(xs, style.logx), ay = make_axis(ys, style.logy);
  const double W = style.width, H = style.height;
  const double left = 70, right = W - 150, top = 40, bottom = H - 50;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
     << "\" viewBox=\"0 0 " << style.width << " " << style.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<!-- format_version = 1 -->\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << style.width << "\" height=\"" << style.height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(style.title)
     << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\"" << bottom - top
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  // Ticks: 5 per axis, at decade marks on log axes when they fit.
  auto ticks = [](const Axis& a) {
    std::vector<double> t;
    if (a.log && a.hi - a.lo >= 1.0) {
      for (double e = std::ceil(a.lo); e <= a.hi; e += 1.0) t.push_back(std::pow(10.0, e));
    } else {
      for (int i = 0; i <= 4; ++i) {
        const double u = a.lo + (a.hi - a.lo) * i / 4.0;
        t.push_back(a.log ? std::pow(10.0, u) : u);
      }
    }
    return t;
  };
  for (double v : ticks(ax)) {
    const double px = ax.map(v, left, right);
    os << "<line x1=\"" << num(px) << "\" y1=\"" << bottom << "\" x2=\"" << num(px) << "\" y2=\"" << bottom + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(px) << "\" y=\"" << bottom + 18 << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
  }
  for (double v : ticks(ay)) {
    const double py = ay.map(v, bottom, top);
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << num(py) << "\" x2=\"" << left << "\" y2=\"" << num(py)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << tick_label(v) << "</text>\n";
  }
  os << "<text x=\"" << num((left + right) / 2) << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << esc(style.xlabel) << (style.logx ? " (log)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << num((top + bottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << num((top + bottom) / 2) << ")\">" << esc(style.ylabel) << (style.logy ? " (log)" : "") << "</text>\n";

  int idx = 0;
  for (const auto& s : series) {
    const char* color = palette[idx % 6];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((style.logx && !(s.x[i] > 0.0)) || (style.logy && !(s.y[i] > 0.0))) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      pts.push_back({ax.map(s.x[i], left, right), ay.map(s.y[i], bottom, top)});
    }
    if (s.line && pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [px, py] : pts) os << num(px) << "," << num(py) << " ";
      os << "\"/>\n";
    }
    if (s.markers)
      for (const auto& [px, py] : pts)
        os << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 14 + 18 * idx;
    os << "<line x1=\"" << right + 10 << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << right + 30 << "\" y2=\""
       << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << right + 35 << "\" y=\"" << num(ly) << "\">" << esc(s.label) << "</text>\n";
    ++idx;
  }

  if (style.fit_guide && !series.empty()) {
    const auto& s = series.front();
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0.0 && s.y[i] > 0.0) {
        lx.push_back(std::log(s.x[i]));
        ly.push_back(std::log(s.y[i]));
      }
    if (lx.size() >= 2 && *std::max_element(lx.begin(), lx.end()) > *std::min_element(lx.begin(), lx.end())) {
      const LinearFit fit = least_squares(lx, ly);
      const double x0 = std::exp(*std::min_element(lx.begin(), lx.end()));
      const double x1 = std::exp(*std::max_element(lx.begin(), lx.end()));
      const double y0 = std::exp(fit.intercept + fit.slope * std::log(x0));
      const double y1 = std::exp(fit.intercept + fit.slope * std::log(x1));
      const Axis gx{ax.lo, ax.hi, true}, gy{ay.lo, ay.hi, true};
      if (style.logx && style.logy) {
        os << "<line x1=\"" << num(gx.map(x0, left, right)) << "\" y1=\"" << num(gy.map(y0, bottom, top)) << "\" x2=\""
           << num(gx.map(x1, left, right)) << "\" y2=\"" << num(gy.map(y1, bottom, top))
           << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
      }
      os << "<text x=\"" << right + 10 << "\" y=\"" << num(bottom - 10) << "\">slope=" << num(fit.slope) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace kslab
