#pragma once

#include <string>
#include <vector>

namespace covertplan {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
};

/// Polyline chart with markers, axis ticks and a legend. Non-finite points
/// are skipped. Throws std::runtime_error if the file cannot be written.
void write_line_chart(const std::string& path, const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace covertplan
