#pragma once

// Minimal deterministic SVG line/scatter plots.

#include <string>
#include <vector>

namespace symrb {

struct PlotSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x, y;
  std::vector<double> y_lo, y_hi;  // optional error bars
  bool line = false;
  bool markers = true;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string comment;  // embedded as an XML comment
  int width = 720;
  int height = 480;
};

std::string render_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

// Tick positions covering [lo, hi] at a 1-2-5 spacing.
std::vector<double> nice_ticks(double lo, double hi, int target = 5);

}  // namespace symrb
