#pragma once

#include <string>
#include <vector>

namespace hcb::svg {

struct Series {
  std::string name;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal line plot: axes with min/max tick labels, one polyline per series
// and a legend. Non-finite points are skipped.
std::string line_plot(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

}  // namespace hcb::svg
