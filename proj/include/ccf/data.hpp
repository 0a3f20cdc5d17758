#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccf/rng.hpp"

namespace ccf {

struct SceneRecord {
  std::int64_t frame_id = 0;
  std::int64_t pedestrian_id = 0;
  double x = 0.0;
  double y = 0.0;
};

// Flat list of tracked positions in meters. (frame_id, pedestrian_id) pairs
// are unique.
struct Scene {
  std::vector<SceneRecord> records;
  std::int64_t frame_step = 1;
};

// Parses whitespace-separated "frame_id pedestrian_id x y" lines. Blank lines
// are skipped. frame_step is the gcd of the positive gaps between distinct
// frame ids.
Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(std::string_view text);
void write_scene(const Scene& scene, const std::filesystem::path& path);
std::string format_scene(const Scene& scene);

// One prediction instance in coordinates translated so that the target's last
// observed point is the origin. All trajectories are stored flattened as
// (x0, y0, x1, y1, ...).
struct TrajectoryWindow {
  std::size_t t_ob = 8;
  std::size_t t_pred = 12;
  std::vector<double> past;             // t_ob * 2
  std::vector<double> future;           // t_pred * 2
  std::vector<double> neighbors;        // neighbor_count * t_ob * 2
  std::vector<std::uint8_t> neighbor_valid;
  std::array<double, 2> origin{0.0, 0.0};
  std::int64_t pedestrian_id = 0;
  std::int64_t start_frame = 0;

  std::size_t neighbor_count() const { return neighbor_valid.size(); }
};

struct WindowOptions {
  std::size_t t_ob = 8;
  std::size_t t_pred = 12;
  // Neighbor slots per window; extra co-present pedestrians are dropped,
  // keeping the nearest at the last observed timestamp.
  std::size_t max_neighbors = 16;
};

// One window per pedestrian per run of t_ob + t_pred consecutive timestamps
// (stride 1). Neighbors are the pedestrians present at every observed
// timestamp, sorted by distance at the last observed step. Windows are
// ordered by (start_frame, pedestrian_id).
std::vector<TrajectoryWindow> make_windows(const Scene& scene, const WindowOptions& options = {});

// Adds the window origin back to a flattened trajectory.
std::vector<double> denormalize(std::span<const double> points, const std::array<double, 2>& origin);

// Chronological split: the first `train_fraction` of the (already ordered)
// windows train, the rest test.
struct WindowSplit {
  std::vector<TrajectoryWindow> train;
  std::vector<TrajectoryWindow> test;
};
WindowSplit split_chronological(std::vector<TrajectoryWindow> windows, double train_fraction = 0.8);

enum class MotionModel { constant_velocity, turning, stop_and_go };

struct MotionMix {
  double constant_velocity = 1.0;
  double turning = 1.0;
  double stop_and_go = 1.0;
};

struct SynthOptions {
  std::size_t n_pedestrians = 20;
  std::size_t n_frames = 100;
  MotionMix motion_mix;
  double noise_sd = 0.0;
  std::int64_t frame_step = 10;
  double dt = 0.4;
  // Minimum track length in timestamps; defaults to one full window.
  std::size_t min_track = 20;
};

// Independent pedestrians, each following a sampled motion model for a random
// contiguous span of frames, plus isotropic Gaussian position noise.
Scene synth_scene(const SynthOptions& options, Rng& rng);

}  // namespace ccf
