#include "dep/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dep {

namespace {

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string class_color(int cls, int total) {
  // evenly spaced hues, fixed saturation/value
  const double h = total > 0 ? 360.0 * static_cast<double>(cls) / static_cast<double>(total) : 0.0;
  const double s = 0.65, v = 0.85;
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(std::lround((r + m) * 255)),
                static_cast<int>(std::lround((g + m) * 255)),
                static_cast<int>(std::lround((b + m) * 255)));
  return buf;
}

std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::vector<std::string>& classes, const std::string& config_hash) {
  const double size = 800, margin = 40;
  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  if (!points.empty()) {
    min_x = max_x = points[0].x;
    min_y = max_y = points[0].y;
    for (const ScatterPoint& p : points) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  auto px = [&](double x) { return margin + (x - min_x) / span_x * (size - 2 * margin); };
  auto py = [&](double y) { return size - margin - (y - min_y) / span_y * (size - 2 * margin); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt1(size) +
                    "\" height=\"" + fmt1(size) + "\">\n";
  svg += "<!-- config_hash=" + config_hash + " -->\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const ScatterPoint& p : points) {
    svg += "<circle cx=\"" + fmt1(px(p.x)) + "\" cy=\"" + fmt1(py(p.y)) + "\" r=\"3\" fill=\"" +
           class_color(p.cls, static_cast<int>(classes.size())) + "\"";
    if (p.framed) svg += " stroke=\"black\" stroke-width=\"1.2\"";
    svg += "/>\n";
  }
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const double y = margin + 16 * static_cast<double>(c);
    svg += "<circle cx=\"" + fmt1(size - 130) + "\" cy=\"" + fmt1(y) + "\" r=\"5\" fill=\"" +
           class_color(static_cast<int>(c), static_cast<int>(classes.size())) + "\"/>\n";
    svg += "<text x=\"" + fmt1(size - 120) + "\" y=\"" + fmt1(y + 4) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + classes[c] + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string heatmap_svg(const std::vector<std::int64_t>& counts,
                        const std::vector<std::string>& classes, const std::string& config_hash) {
  const int k = static_cast<int>(classes.size());
  const double cell = 36, label = 110, pad = 10;
  const double size_w = label + k * cell + pad;
  const double size_h = label + k * cell + pad;
  std::int64_t max_v = 1;
  for (std::int64_t v : counts) max_v = std::max(max_v, v);

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt1(size_w) +
                    "\" height=\"" + fmt1(size_h) + "\">\n";
  svg += "<!-- config_hash=" + config_hash + " -->\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      const double t = static_cast<double>(counts[static_cast<std::size_t>(r * k + c)]) /
                       static_cast<double>(max_v);
      // white to dark blue
      const int red = static_cast<int>(std::lround(255 * (1 - t)));
      const int green = static_cast<int>(std::lround(255 - 180 * t));
      const int blue = static_cast<int>(std::lround(255 - 100 * t));
      char color[8];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", red, green, blue);
      svg += "<rect x=\"" + fmt1(label + c * cell) + "\" y=\"" + fmt1(label + r * cell) +
             "\" width=\"" + fmt1(cell) + "\" height=\"" + fmt1(cell) + "\" fill=\"" + color +
             "\" stroke=\"#ccc\"/>\n";
    }
  for (int i = 0; i < k; ++i) {
    svg += "<text x=\"" + fmt1(label - 6) + "\" y=\"" + fmt1(label + i * cell + cell / 2 + 4) +
           "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">" + classes[static_cast<std::size_t>(i)] +
           "</text>\n";
    svg += "<text x=\"" + fmt1(label + i * cell + cell / 2) + "\" y=\"" + fmt1(label - 6) +
           "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"start\" transform=\"rotate(-60 " +
           fmt1(label + i * cell + cell / 2) + " " + fmt1(label - 6) + ")\">" + classes[static_cast<std::size_t>(i)] +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace dep
