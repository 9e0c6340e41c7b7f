#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace covertplan {

/// Shortest round-trip text for a double ("%.17g"), so reruns are byte-equal.
std::string format_number(double v);

/// Comma-separated writer that flushes after every row, so a failure part
/// way through a sweep leaves the finished rows on disk.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace covertplan
