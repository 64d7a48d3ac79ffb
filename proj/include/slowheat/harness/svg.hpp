#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace slowheat::harness {

struct Series {
  std::vector<double> x, y;
  std::string label;
  std::string color = "#1f6feb";
  bool dashed = false;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
};

// Deterministic standalone SVG line plot: fixed canvas, no timestamps, all
// numbers formatted identically on every run.
std::string render_line_plot(const PlotSpec& spec);

void write_line_plot(const PlotSpec& spec, const std::filesystem::path& path);

}  // namespace slowheat::harness
