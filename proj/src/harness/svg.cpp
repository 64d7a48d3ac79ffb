#include "slowheat/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "slowheat/errors.hpp"
#include "slowheat/harness/io.hpp"

namespace slowheat::harness {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 40, kBottom = 56;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round-number tick positions covering [lo, hi] (linear scale).
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(t);
  return ticks;
}

// Decade ticks for log scales.
std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> ticks;
  const int e0 = int(std::floor(std::log10(lo)));
  const int e1 = int(std::ceil(std::log10(hi)));
  for (int e = e0; e <= e1; ++e) {
    const double t = std::pow(10.0, e);
    if (t >= lo * (1 - 1e-9) && t <= hi * (1 + 1e-9)) ticks.push_back(t);
  }
  if (ticks.empty()) ticks = {lo, hi};
  return ticks;
}

}  // namespace

std::string render_line_plot(const PlotSpec& spec) {
  if (spec.series.empty())
    throw validation_error("render_line_plot: no series");
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  bool first = true;
  for (const Series& s : spec.series) {
    if (s.x.size() != s.y.size())
      throw validation_error("render_line_plot: series size mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double px = s.x[i], py = s.y[i];
      if (spec.log_x && !(px > 0.0))
        throw validation_error("render_line_plot: log x needs positive data");
      if (spec.log_y && !(py > 0.0))
        throw validation_error("render_line_plot: log y needs positive data");
      if (first) {
        x_lo = x_hi = px;
        y_lo = y_hi = py;
        first = false;
      } else {
        x_lo = std::min(x_lo, px);
        x_hi = std::max(x_hi, px);
        y_lo = std::min(y_lo, py);
        y_hi = std::max(y_hi, py);
      }
    }
  }
  if (first) throw validation_error("render_line_plot: empty series");
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    y_lo = spec.log_y ? y_lo * 0.5 : y_lo - 0.5;
    y_hi = spec.log_y ? y_hi * 2.0 : y_hi + 0.5;
  }

  const auto tx = [&](double v) {
    const double a = spec.log_x ? std::log(v) : v;
    const double lo = spec.log_x ? std::log(x_lo) : x_lo;
    const double hi = spec.log_x ? std::log(x_hi) : x_hi;
    return kLeft + (a - lo) / (hi - lo) * (kWidth - kLeft - kRight);
  };
  const auto ty = [&](double v) {
    const double a = spec.log_y ? std::log(v) : v;
    const double lo = spec.log_y ? std::log(y_lo) : y_lo;
    const double hi = spec.log_y ? std::log(y_hi) : y_hi;
    return kHeight - kBottom - (a - lo) / (hi - lo) * (kHeight - kTop - kBottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << xml_escape(spec.title)
      << "</text>\n";

  const auto x_ticks = spec.log_x ? log_ticks(x_lo, x_hi) : linear_ticks(x_lo, x_hi);
  const auto y_ticks = spec.log_y ? log_ticks(y_lo, y_hi) : linear_ticks(y_lo, y_hi);
  svg << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double t : x_ticks)
    svg << "<line x1=\"" << num(tx(t)) << "\" y1=\"" << kTop << "\" x2=\""
        << num(tx(t)) << "\" y2=\"" << kHeight - kBottom << "\"/>\n";
  for (double t : y_ticks)
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << num(ty(t)) << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << num(ty(t)) << "\"/>\n";
  svg << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">\n";
  for (double t : x_ticks)
    svg << "<text x=\"" << num(tx(t)) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
  for (double t : y_ticks)
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(ty(t) + 4)
        << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  svg << "</g>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
      << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << xml_escape(spec.x_label) << "</text>\n";
  svg << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 16 " << kHeight / 2 << ")\">"
      << xml_escape(spec.y_label) << "</text>\n";

  double legend_y = kTop + 16;
  for (const Series& s : spec.series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\"";
    if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
    svg << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg << (i ? " " : "") << num(tx(s.x[i])) << "," << num(ty(s.y[i]));
    svg << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << "<circle cx=\"" << num(tx(s.x[i])) << "\" cy=\""
            << num(ty(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    if (!s.label.empty()) {
      svg << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << legend_y
          << "\" x2=\"" << kWidth - kRight - 126 << "\" y2=\"" << legend_y
          << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
      svg << "<text x=\"" << kWidth - kRight - 120 << "\" y=\"" << legend_y + 4
          << "\" font-family=\"sans-serif\" font-size=\"11\">"
          << xml_escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_line_plot(const PlotSpec& spec, const std::filesystem::path& path) {
  write_text_file(path, render_line_plot(spec));
}

}  // namespace slowheat::harness
