#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccf/clustering.hpp"
#include "ccf/config.hpp"
#include "ccf/data.hpp"
#include "ccf/dnet.hpp"
#include "ccf/params.hpp"
#include "ccf/rng.hpp"
#include "ccf/subnet.hpp"

namespace ccf {

// Scalar loss components of one step (batch means). Terms disabled by the
// configuration are reported as exactly zero.
struct LossBreakdown {
  double l_div = 0.0;
  double l_traj_a = 0.0;
  double l_cls_a = 0.0;
  double l_traj_b = 0.0;
  double l_cls_b = 0.0;
  double l_cor_a = 0.0;
  double l_cor_b = 0.0;
  double l_total = 0.0;

  // l_div + (l_traj_a + l_cls_a) + (l_traj_b + l_cls_b) + lambda (l_cor_a + l_cor_b)
  double recompose(double lambda) const;

  static std::string csv_header();
  std::string csv_row() const;
  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

void adam_update(const ParamList& params, AdamState& state, double learning_rate);

// Everything needed to continue training bit-exactly.
struct TrainingState {
  CcfConfig config;
  TrajectoryClassSet classes;
  Subnet subnet_a;
  Subnet subnet_b;
  DNet dnet;
  AdamState optimizer;
  std::uint64_t epoch = 0;
  // Independent streams so that data order does not depend on how much noise
  // a configuration consumes.
  Rng shuffle_rng;
  Rng noise_rng;

  // Fresh parameters drawn from config.seed.
  static TrainingState create(const CcfConfig& config, TrajectoryClassSet classes);

  // Parameters updated by the optimizer, in fixed order: A, then B and DNet
  // unless the run trains subnet A alone.
  ParamList trainable() const;
};

// Fits the K anchors on the futures of the training windows.
TrajectoryClassSet fit_training_classes(std::span<const TrajectoryWindow> windows,
                                        const CcfConfig& config);

// The differentiable loss terms of one batch. Disabled terms are undefined.
struct LossGraph {
  Tensor l_div, l_traj_a, l_cls_a, l_traj_b, l_cls_b, l_cor_a, l_cor_b;
  Tensor l_total;
  SubnetBatchOutput out_a;
  std::optional<SubnetBatchOutput> out_b;
  Tensor input_b;  // what subnet B saw, [B, t_ob * 2]

  LossBreakdown breakdown() const;
};

// Draws subnet B's input (consuming noise_rng) and builds all loss terms.
LossGraph build_losses(std::span<const TrajectoryWindow> batch, TrainingState& state);

// Per-window primary and secondary losses.
std::pair<Tensor, Tensor> subnet_loss(const SubnetBatchOutput& output, const Tensor& future,
                                      const Tensor& class_targets,
                                      std::span<const std::size_t> nearest, const CcfConfig& config);

// Huber of each subnet's candidates against the other's, with the other side
// treated as a constant target.
std::pair<Tensor, Tensor> cross_correction_losses(const Tensor& candidates_a,
                                                  const Tensor& candidates_b, double delta = 1.0);

// One optimizer update on one batch. Throws NumericalError naming the first
// non-finite component.
LossBreakdown train_step(std::span<const TrajectoryWindow> batch, TrainingState& state);

// The input subnet B sees before DNet: noise for dnet/noise, zeroed timesteps
// for drop/mask. `past` holds b trajectories of t_ob points.
std::vector<double> transform_inputs(std::span<const double> past, std::size_t b, std::size_t t_ob,
                                     const CcfConfig& config, Rng& rng);

// Distance between each observed trajectory and the input subnet B would
// receive for it, with a fixed noise stream so that runs are comparable.
DiversityMetrics measure_diversity(std::span<const TrajectoryWindow> windows, const TrainingState& state);

struct EpochSummary {
  std::uint64_t epoch = 0;
  std::size_t steps = 0;
  LossBreakdown mean;
};

// Shuffles with shuffle_rng, runs every batch, increments state.epoch.
EpochSummary train_epoch(std::span<const TrajectoryWindow> windows, TrainingState& state,
                         const std::function<void(const LossBreakdown&)>& on_step = {});

}  // namespace ccf
