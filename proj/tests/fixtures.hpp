#pragma once

#include <vector>

#include "ccf/config.hpp"
#include "ccf/data.hpp"
#include "ccf/training.hpp"

namespace ccf::test {

inline std::vector<TrajectoryWindow> synthetic_windows(std::size_t peds, std::size_t frames, std::uint64_t seed,
                                                       MotionMix mix = {}, double noise_sd = 0.02,
                                                       std::size_t max_neighbors = 4) {
  SynthOptions opt;
  opt.n_pedestrians = peds;
  opt.n_frames = frames;
  opt.motion_mix = mix;
  opt.noise_sd = noise_sd;
  Rng rng(seed);
  WindowOptions wo;
  wo.max_neighbors = max_neighbors;
  return make_windows(synth_scene(opt, rng), wo);
}

inline CcfConfig small_config() {
  CcfConfig c;
  c.k = 6;
  c.d = 16;
  c.heads = 2;
  c.ff_mult = 2;
  c.dnet_hidden = 32;
  c.max_neighbors = 4;
  c.batch_size = 8;
  c.seed = 7;
  return c;
}

inline TrainingState small_state(const std::vector<TrajectoryWindow>& windows, CcfConfig config = small_config()) {
  return TrainingState::create(config, fit_training_classes(windows, config));
}

}  // namespace ccf::test
