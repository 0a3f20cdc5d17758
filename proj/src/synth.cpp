#include <algorithm>
#include <cmath>
#include <numbers>

#include "ccf/data.hpp"
#include "ccf/errors.hpp"

namespace ccf {
namespace {

MotionModel sample_model(const MotionMix& mix, Rng& rng) {
  const double total = mix.constant_velocity + mix.turning + mix.stop_and_go;
  const double u = rng.uniform() * total;
  if (u < mix.constant_velocity) return MotionModel::constant_velocity;
  if (u < mix.constant_velocity + mix.turning) return MotionModel::turning;
  return MotionModel::stop_and_go;
}

}  // namespace

Scene synth_scene(const SynthOptions& options, Rng& rng) {
  if (options.n_frames < options.min_track) {
    throw ValidationError("synth_scene: n_frames " + std::to_string(options.n_frames) +
                          " is shorter than one window (" + std::to_string(options.min_track) + ")");
  }
  const MotionMix& mix = options.motion_mix;
  if (mix.constant_velocity < 0 || mix.turning < 0 || mix.stop_and_go < 0 ||
      mix.constant_velocity + mix.turning + mix.stop_and_go <= 0) {
    throw ValidationError("synth_scene: motion mix weights must be nonnegative and not all zero");
  }
  if (options.noise_sd < 0) throw ValidationError("synth_scene: noise_sd must be nonnegative");

  const double dt = options.dt;
  Scene scene;
  scene.frame_step = options.frame_step;
  for (std::size_t ped = 0; ped < options.n_pedestrians; ++ped) {
    const std::size_t length =
        options.min_track + rng.index(options.n_frames - options.min_track + 1);
    const std::size_t start = rng.index(options.n_frames - length + 1);
    const MotionModel model = sample_model(mix, rng);
    const double x0 = rng.uniform(0.0, 20.0);
    const double y0 = rng.uniform(0.0, 20.0);
    const double heading0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = rng.uniform(0.8, 1.6);

    std::vector<std::array<double, 2>> path(length);
    if (model == MotionModel::constant_velocity) {
      const double vx = speed * std::cos(heading0);
      const double vy = speed * std::sin(heading0);
      for (std::size_t t = 0; t < length; ++t) {
        const double elapsed = static_cast<double>(t) * dt;
        path[t] = {x0 + vx * elapsed, y0 + vy * elapsed};
      }
    } else if (model == MotionModel::turning) {
      const std::size_t turn_at = rng.index(length);
      const double rate = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.3, 0.8);
      double heading = heading0;
      path[0] = {x0, y0};
      for (std::size_t t = 1; t < length; ++t) {
        if (t > turn_at) heading += rate * dt;
        path[t] = {path[t - 1][0] + speed * dt * std::cos(heading),
                   path[t - 1][1] + speed * dt * std::sin(heading)};
      }
    } else {
      bool walking = true;
      std::size_t phase_left = 4 + rng.index(9);
      path[0] = {x0, y0};
      for (std::size_t t = 1; t < length; ++t) {
        const double v = walking ? speed : 0.0;
        path[t] = {path[t - 1][0] + v * dt * std::cos(heading0),
                   path[t - 1][1] + v * dt * std::sin(heading0)};
        if (--phase_left == 0) {
          walking = !walking;
          phase_left = walking ? 4 + rng.index(9) : 2 + rng.index(7);
        }
      }
    }
    for (std::size_t t = 0; t < length; ++t) {
      SceneRecord rec;
      rec.frame_id = static_cast<std::int64_t>(start + t) * options.frame_step;
      rec.pedestrian_id = static_cast<std::int64_t>(ped + 1);
      rec.x = path[t][0];
      rec.y = path[t][1];
      if (options.noise_sd > 0) {
        rec.x += options.noise_sd * rng.normal();
        rec.y += options.noise_sd * rng.normal();
      }
      scene.records.push_back(rec);
    }
  }
  std::stable_sort(scene.records.begin(), scene.records.end(), [](const auto& a, const auto& b) {
    return a.frame_id != b.frame_id ? a.frame_id < b.frame_id : a.pedestrian_id < b.pedestrian_id;
  });
  return scene;
}

}  // namespace ccf
