#pragma once

#include <string>
#include <vector>

namespace gazekit::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
};

// Static SVG 1.1 markup; output is a pure function of the inputs.
std::string line_chart(const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const std::vector<Series>& series,
                       int width = 720, int height = 420);

std::string histogram(const std::string& title, const std::string& xlabel,
                      const std::vector<double>& values, int bins = 24,
                      int width = 720, int height = 420);

void write_file(const std::string& path, const std::string& content);

}  // namespace gazekit::svg
