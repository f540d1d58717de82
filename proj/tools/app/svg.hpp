#pragma once

// Minimal deterministic SVG writer for line and bar charts.

#include <string>
#include <vector>

namespace artss::app {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Bars {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<double> heights;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  Bars bars;
  std::vector<Series> lines;
};

// Panels are laid out side by side.
std::string render_svg(const std::vector<Panel>& panels);

}  // namespace artss::app
