#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dep {

struct ScatterPoint {
  double x = 0;
  double y = 0;
  int cls = 0;
  bool framed = false;  // test-set points are drawn with a frame
};

std::string class_color(int cls, int total);

std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::vector<std::string>& classes, const std::string& config_hash);

// Row-major K x K counts, rows = true class, in the given display order.
std::string heatmap_svg(const std::vector<std::int64_t>& counts,
                        const std::vector<std::string>& classes, const std::string& config_hash);

}  // namespace dep
