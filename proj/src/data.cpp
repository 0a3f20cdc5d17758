#include "ccf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "ccf/errors.hpp"
#include "ccf/io.hpp"

namespace ccf {
namespace {

double parse_number(std::string_view token, std::size_t line_no, const char* field) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("line " + std::to_string(line_no) + ": invalid " + field + " '" +
                     std::string(token) + "'");
  }
  return value;
}

std::int64_t parse_integral(std::string_view token, std::size_t line_no, const char* field) {
  const double value = parse_number(token, line_no, field);
  if (value != std::floor(value) || std::abs(value) > 9.0e15) {
    throw ParseError("line " + std::to_string(line_no) + ": " + field + " '" +
                     std::string(token) + "' is not an integer");
  }
  return static_cast<std::int64_t>(value);
}

}  // namespace

Scene parse_scene(std::string_view text) {
  Scene scene;
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.push_back(line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) continue;
    if (tokens.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, found " +
                       std::to_string(tokens.size()));
    }
    SceneRecord rec;
    rec.frame_id = parse_integral(tokens[0], line_no, "frame_id");
    rec.pedestrian_id = parse_integral(tokens[1], line_no, "pedestrian_id");
    rec.x = parse_number(tokens[2], line_no, "x");
    rec.y = parse_number(tokens[3], line_no, "y");
    if (!seen.emplace(rec.frame_id, rec.pedestrian_id).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate record for frame " +
                       std::to_string(rec.frame_id) + ", pedestrian " +
                       std::to_string(rec.pedestrian_id));
    }
    scene.records.push_back(rec);
  }
  if (scene.records.empty()) throw ValidationError("empty input: scene contains no records");

  std::vector<std::int64_t> frames;
  frames.reserve(scene.records.size());
  for (const auto& r : scene.records) frames.push_back(r.frame_id);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  std::int64_t step = 0;
  for (std::size_t k = 1; k < frames.size(); ++k) step = std::gcd(step, frames[k] - frames[k - 1]);
  scene.frame_step = step > 0 ? step : 1;
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scene file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scene(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string format_scene(const Scene& scene) {
  std::string out;
  char line[160];
  for (const auto& r : scene.records) {
    std::snprintf(line, sizeof(line), "%lld\t%lld\t%.17g\t%.17g\n",
                  static_cast<long long>(r.frame_id), static_cast<long long>(r.pedestrian_id), r.x,
                  r.y);
    out += line;
  }
  return out;
}

void write_scene(const Scene& scene, const std::filesystem::path& path) {
  write_file_atomic(path, format_scene(scene));
}

std::vector<TrajectoryWindow> make_windows(const Scene& scene, const WindowOptions& options) {
  using Point = std::array<double, 2>;
  std::map<std::int64_t, std::map<std::int64_t, Point>> tracks;  // ped -> frame -> position
  std::map<std::int64_t, std::vector<std::int64_t>> present;     // frame -> peds
  for (const auto& r : scene.records) {
    tracks[r.pedestrian_id][r.frame_id] = {r.x, r.y};
    present[r.frame_id].push_back(r.pedestrian_id);
  }
  const std::size_t span = options.t_ob + options.t_pred;
  const std::int64_t step = scene.frame_step;
  std::vector<TrajectoryWindow> windows;

  for (const auto& [ped, track] : tracks) {
    std::vector<std::pair<std::int64_t, Point>> pts(track.begin(), track.end());
    if (pts.size() < span) continue;
    for (std::size_t s = 0; s + span <= pts.size(); ++s) {
      bool consecutive = true;
      for (std::size_t t = 1; t < span && consecutive; ++t) {
        consecutive = pts[s + t].first - pts[s + t - 1].first == step;
      }
      if (!consecutive) continue;

      TrajectoryWindow w;
      w.t_ob = options.t_ob;
      w.t_pred = options.t_pred;
      w.pedestrian_id = ped;
      w.start_frame = pts[s].first;
      w.origin = pts[s + options.t_ob - 1].second;
      for (std::size_t t = 0; t < span; ++t) {
        auto& dst = t < options.t_ob ? w.past : w.future;
        dst.push_back(pts[s + t].second[0] - w.origin[0]);
        dst.push_back(pts[s + t].second[1] - w.origin[1]);
      }

      const std::int64_t last_obs = pts[s + options.t_ob - 1].first;
      std::vector<std::pair<double, std::int64_t>> candidates;
      for (std::int64_t other : present[last_obs]) {
        if (other == ped) continue;
        const auto& other_track = tracks[other];
        bool full = true;
        for (std::size_t t = 0; t < options.t_ob && full; ++t) {
          full = other_track.count(pts[s + t].first) > 0;
        }
        if (!full) continue;
        const Point& p = other_track.at(last_obs);
        const double dx = p[0] - w.origin[0];
        const double dy = p[1] - w.origin[1];
        candidates.emplace_back(dx * dx + dy * dy, other);
      }
      std::sort(candidates.begin(), candidates.end());
      if (candidates.size() > options.max_neighbors) candidates.resize(options.max_neighbors);

      w.neighbors.assign(options.max_neighbors * options.t_ob * 2, 0.0);
      w.neighbor_valid.assign(options.max_neighbors, 0);
      for (std::size_t n = 0; n < candidates.size(); ++n) {
        const auto& other_track = tracks[candidates[n].second];
        w.neighbor_valid[n] = 1;
        for (std::size_t t = 0; t < options.t_ob; ++t) {
          const Point& p = other_track.at(pts[s + t].first);
          w.neighbors[(n * options.t_ob + t) * 2 + 0] = p[0] - w.origin[0];
          w.neighbors[(n * options.t_ob + t) * 2 + 1] = p[1] - w.origin[1];
        }
      }
      windows.push_back(std::move(w));
    }
  }
  std::stable_sort(windows.begin(), windows.end(), [](const auto& a, const auto& b) {
    return a.start_frame != b.start_frame ? a.start_frame < b.start_frame
                                          : a.pedestrian_id < b.pedestrian_id;
  });
  return windows;
}

std::vector<double> denormalize(std::span<const double> points, const std::array<double, 2>& origin) {
  std::vector<double> out(points.begin(), points.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += origin[i % 2];
  return out;
}

WindowSplit split_chronological(std::vector<TrajectoryWindow> windows, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw ValidationError("train fraction must lie in [0, 1]");
  }
  const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(windows.size())));
  WindowSplit split;
  split.test.assign(std::make_move_iterator(windows.begin() + static_cast<std::ptrdiff_t>(cut)),
                    std::make_move_iterator(windows.end()));
  windows.resize(cut);
  split.train = std::move(windows);
  return split;
}

}  // namespace ccf
