#include "ccf/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "ccf/errors.hpp"

namespace ccf {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Appends the record's origin to `points`, a normalized flattened trajectory,
// optionally preceded by a joining point.
std::string polyline(const Viewport& vp, const WindowRecord& r, std::span<const double> points,
                     const double* lead, const std::string& attrs) {
  std::string out = "  <polyline " + attrs + " points=\"";
  bool first = true;
  auto add = [&](double x, double y) {
    const auto p = vp.to_pixels(x + r.origin[0], y + r.origin[1]);
    if (!first) out += ' ';
    first = false;
    out += fmt(p[0]) + "," + fmt(p[1]);
  };
  if (lead) add(lead[0], lead[1]);
  for (std::size_t i = 0; i + 1 < points.size(); i += 2) add(points[i], points[i + 1]);
  out += "\"/>\n";
  return out;
}

}  // namespace

Viewport fit_viewport(const WindowRecord& r, double width, double height, double margin) {
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  auto scan = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) {
      xmin = std::min(xmin, v[i] + r.origin[0]);
      xmax = std::max(xmax, v[i] + r.origin[0]);
      ymin = std::min(ymin, v[i + 1] + r.origin[1]);
      ymax = std::max(ymax, v[i + 1] + r.origin[1]);
    }
  };
  scan(r.past);
  scan(r.future);
  scan(r.candidates);
  if (!(xmin <= xmax)) throw ValidationError("plot: record has no points");
  Viewport vp;
  vp.width = width;
  vp.height = height;
  vp.margin = margin;
  vp.xmin = xmin;
  vp.ymin = ymin;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  vp.scale = std::min(width, height) - 2.0 * margin;
  vp.scale /= span;
  return vp;
}

std::string render_svg(const WindowRecord& r) {
  const std::size_t width = r.future.size();
  if (width == 0 || r.candidates.size() % width != 0 || r.past.size() < 2) {
    throw ValidationError("plot: inconsistent record");
  }
  const std::size_t count = r.candidates.size() / width;
  if (r.best_ade_index >= count) throw ValidationError("plot: best index out of range");

  const Viewport vp = fit_viewport(r);
  const double* last_past = r.past.data() + r.past.size() - 2;
  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(vp.width) + "\" height=\"" +
         fmt(vp.height) + "\" viewBox=\"0 0 " + fmt(vp.width) + " " + fmt(vp.height) + "\"" +
         " data-xmin=\"" + fmt(vp.xmin) + "\" data-ymin=\"" + fmt(vp.ymin) + "\" data-scale=\"" +
         fmt(vp.scale) + "\" data-margin=\"" + fmt(vp.margin) + "\" data-height=\"" +
         fmt(vp.height) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "  <title>pedestrian " + std::to_string(r.pedestrian_id) + ", frame " +
         std::to_string(r.start_frame) + "</title>\n";
  for (std::size_t c = 0; c < count; ++c) {
    svg += polyline(vp, r, std::span<const double>(r.candidates).subspan(c * width, width), last_past,
                    "class=\"candidate\" data-index=\"" + std::to_string(c) +
                        "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"3,2\"");
  }
  svg += polyline(vp, r, r.past, nullptr,
                  "class=\"past\" fill=\"none\" stroke=\"#1f4fd8\" stroke-width=\"2.5\"");
  svg += polyline(vp, r, r.future, last_past,
                  "class=\"truth\" fill=\"none\" stroke=\"#1a9641\" stroke-width=\"2.5\"");
  svg += polyline(vp, r, std::span<const double>(r.candidates).subspan(r.best_ade_index * width, width),
                  last_past, "class=\"best\" fill=\"none\" stroke=\"#d7191c\" stroke-width=\"2\"");

  const char* labels[][2] = {{"observed", "#1f4fd8"},
                             {"ground truth", "#1a9641"},
                             {"candidates", "#999999"},
                             {"best (min ADE)", "#d7191c"}};
  svg += "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int i = 0; i < 4; ++i) {
    const double y = 16.0 + 16.0 * i;
    svg += "    <line x1=\"10\" y1=\"" + fmt(y) + "\" x2=\"34\" y2=\"" + fmt(y) + "\" stroke=\"" +
           labels[i][1] + "\" stroke-width=\"2\"/>\n";
    svg += "    <text x=\"40\" y=\"" + fmt(y + 4) + "\">" + labels[i][0] + "</text>\n";
  }
  svg += "  </g>\n</svg>\n";
  return svg;
}

std::string render_svg(const std::vector<WindowRecord>& records, std::size_t index) {
  if (index >= records.size()) {
    throw ValidationError("plot: window index " + std::to_string(index) + " out of range (" +
                          std::to_string(records.size()) + " records)");
  }
  return render_svg(records[index]);
}

}  // namespace ccf
