#pragma once

#include <span>
#include <vector>

#include "ccf/params.hpp"
#include "ccf/rng.hpp"
#include "ccf/tensor.hpp"

namespace ccf {

// x + alpha * eta with eta ~ N(0, 1) elementwise.
std::vector<double> perturb(std::span<const double> x, double alpha, Rng& rng);

// Two-hidden-layer relu MLP mapping a flattened observed trajectory
// (t_ob * 2 values) to a diversified trajectory of the same size.
class DNet {
 public:
  DNet(std::size_t t_ob, std::size_t hidden, Rng& rng);

  std::size_t input_width() const { return input_width_; }
  std::size_t hidden() const { return hidden_; }

  // x_tilde: [B, t_ob * 2] -> [B, t_ob * 2]
  Tensor forward(const Tensor& x_tilde) const;
  ParamList params() const;

 private:
  std::size_t input_width_;
  std::size_t hidden_;
  Tensor w1_, b1_, w2_, b2_, w3_, b3_;
};

// Single-trajectory convenience wrapper; records no history.
std::vector<double> diversify(std::span<const double> x_tilde, const DNet& dnet);

// Huber distance between the original observed trajectory and DNet's output.
Tensor dnet_loss(const Tensor& x, const Tensor& x_prime, double delta = 1.0);

struct DiversityMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

// Dataset means over every coordinate of every paired trajectory.
DiversityMetrics diversity_metrics(std::span<const std::vector<double>> originals,
                                   std::span<const std::vector<double>> diversified);

}  // namespace ccf
