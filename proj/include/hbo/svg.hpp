#pragma once

#include <string>
#include <vector>

namespace hbo {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Optional symmetric band (same length as y), drawn as a shaded area.
  std::vector<double> band;
};

/// Minimal line chart: axes with min/max ticks, one polyline per series and
/// a legend.
std::string render_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<SvgSeries>& series);

}  // namespace hbo
