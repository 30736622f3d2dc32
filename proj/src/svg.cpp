#include "qmetro/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace qmetro {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 72.0;
constexpr double kMarginRight = 24.0;
constexpr double kMarginTop = 42.0;
constexpr double kMarginBottom = 58.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round a raw spacing up to a 1/2/5 multiple of a power of ten.
double nice_step(double raw) {
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double base = raw / mag;
  if (base <= 1.0) return mag;
  if (base <= 2.0) return 2.0 * mag;
  if (base <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.1;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

} // namespace

std::string render_line_chart(const PlotSpec& spec) {
  if (spec.series.empty()) throw std::invalid_argument("render_line_chart: no series");

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : spec.series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("render_line_chart: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double xv = s.x[i];
      if (!std::isfinite(xv) || !std::isfinite(s.y[i])) continue;
      if (spec.log_x) {
        if (xv <= 0.0) continue;
        xv = std::log10(xv);
      }
      xmin = std::min(xmin, xv);
      xmax = std::max(xmax, xv);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin))
    throw std::invalid_argument("render_line_chart: no finite data points");

  const Range xr = padded(xmin, xmax);
  const Range yr = padded(ymin, ymax);
  const double plot_w = kWidth - kMarginLeft - kMarginRight;
  const double plot_h = kHeight - kMarginTop - kMarginBottom;
  auto tx = [&](double v) {
    if (spec.log_x) v = std::log10(v);
    return kMarginLeft + (v - xr.lo) / (xr.hi - xr.lo) * plot_w;
  };
  auto ty = [&](double v) {
    return kMarginTop + (yr.hi - v) / (yr.hi - yr.lo) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << escape(spec.title) << "</text>\n";

  // Grid and ticks.
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  if (spec.log_x) {
    const int k_lo = static_cast<int>(std::ceil(xr.lo - 1e-9));
    const int k_hi = static_cast<int>(std::floor(xr.hi + 1e-9));
    for (int k = k_lo; k <= k_hi; ++k) {
      const double px = kMarginLeft + (k - xr.lo) / (xr.hi - xr.lo) * plot_w;
      out << "<line x1=\"" << fmt(px) << "\" y1=\"" << kMarginTop << "\" x2=\""
          << fmt(px) << "\" y2=\"" << kMarginTop + plot_h
          << "\" stroke=\"#dddddd\"/>\n";
      out << "<text x=\"" << fmt(px) << "\" y=\"" << kMarginTop + plot_h + 16
          << "\" text-anchor=\"middle\">" << fmt(std::pow(10.0, k))
          << "</text>\n";
    }
  } else {
    const double step = nice_step((xr.hi - xr.lo) / 5.0);
    for (double v = std::ceil(xr.lo / step) * step; v <= xr.hi + step * 1e-9; v += step) {
      const double px = tx(v);
      out << "<line x1=\"" << fmt(px) << "\" y1=\"" << kMarginTop << "\" x2=\""
          << fmt(px) << "\" y2=\"" << kMarginTop + plot_h
          << "\" stroke=\"#dddddd\"/>\n";
      out << "<text x=\"" << fmt(px) << "\" y=\"" << kMarginTop + plot_h + 16
          << "\" text-anchor=\"middle\">" << fmt(std::abs(v) < step * 1e-9 ? 0.0 : v)
          << "</text>\n";
    }
  }
  {
    const double step = nice_step((yr.hi - yr.lo) / 5.0);
    for (double v = std::ceil(yr.lo / step) * step; v <= yr.hi + step * 1e-9; v += step) {
      const double py = ty(v);
      out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << fmt(py) << "\" x2=\""
          << kMarginLeft + plot_w << "\" y2=\"" << fmt(py)
          << "\" stroke=\"#dddddd\"/>\n";
      out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << fmt(py + 4)
          << "\" text-anchor=\"end\">" << fmt(std::abs(v) < step * 1e-9 ? 0.0 : v)
          << "</text>\n";
    }
  }
  out << "</g>\n";

  // Axes.
  out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
      << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(spec.x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << kMarginTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << kMarginTop + plot_h / 2 << ")\">" << escape(spec.y_label) << "</text>\n";

  // Series.
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string d;
    bool open = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const bool ok = std::isfinite(s.x[i]) && std::isfinite(s.y[i]) &&
                      (!spec.log_x || s.x[i] > 0.0);
      if (!ok) {
        open = false;
        continue;
      }
      d += open ? " L " : " M ";
      d += fmt(tx(s.x[i])) + " " + fmt(ty(s.y[i]));
      open = true;
    }
    if (d.empty()) continue;
    out << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
  }

  // Legend, top-right inside the plot area.
  const double lx = kMarginLeft + plot_w - 178;
  double ly = kMarginTop + 12;
  out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"" << lx - 8 << "\" y=\"" << ly - 12 << "\" width=\"186\" height=\""
      << 18 * spec.series.size() + 8
      << "\" fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#cccccc\"/>\n";
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 26
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << lx + 32 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
        << "</text>\n";
    ly += 18;
  }
  out << "</g>\n";
  out << "</svg>\n";
  return out.str();
}

} // namespace qmetro
