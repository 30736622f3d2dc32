#pragma once

#include <string>
#include <vector>

namespace qmetro {

// Minimal line-chart renderer used by the experiment drivers. Output is a
// single self-contained SVG document; non-finite samples split a series into
// separate polyline segments instead of being drawn.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<PlotSeries> series;
};

std::string render_line_chart(const PlotSpec& spec);

} // namespace qmetro
