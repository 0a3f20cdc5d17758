#pragma once

#include <array>
#include <string>

#include "ccf/evaluation.hpp"

namespace ccf {

// World coordinates map to SVG pixels by
//   px = margin + (x - xmin) * scale
//   py = height - margin - (y - ymin) * scale
// with one scale for both axes. The root element carries these parameters as
// data-* attributes.
struct Viewport {
  double width = 600.0;
  double height = 600.0;
  double margin = 40.0;
  double xmin = 0.0;
  double ymin = 0.0;
  double scale = 1.0;

  std::array<double, 2> to_pixels(double x, double y) const {
    return {margin + (x - xmin) * scale, height - margin - (y - ymin) * scale};
  }
};

// Fits all points of the record (in world coordinates) into the drawing area.
Viewport fit_viewport(const WindowRecord& record, double width = 600.0, double height = 600.0,
                      double margin = 40.0);

// Observed past, ground truth, every candidate and the best candidate by ADE,
// each as its own polyline.
std::string render_svg(const WindowRecord& record);

// Picks records[index]; throws ValidationError when out of range.
std::string render_svg(const std::vector<WindowRecord>& records, std::size_t index);

}  // namespace ccf
