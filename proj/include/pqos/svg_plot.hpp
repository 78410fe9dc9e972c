#pragma once

// Minimal standalone SVG charts. Output is deterministic text.

#include <string>
#include <vector>

namespace pqos::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
};

std::string line_plot(const Axes& axes, const std::vector<Series>& series);

/// Scatter plot; with `diagonal` a gray y = x reference line is drawn.
std::string scatter_plot(const Axes& axes, const std::vector<Series>& series, bool diagonal);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series label; NaN leaves a gap
};

std::string bar_chart(const Axes& axes, const std::vector<std::string>& series_labels,
                      const std::vector<BarGroup>& groups);

}  // namespace pqos::plot
