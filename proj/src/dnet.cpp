#include "ccf/dnet.hpp"

#include <cmath>

#include "ccf/errors.hpp"
#include "ccf/ops.hpp"

namespace ccf {

std::vector<double> perturb(std::span<const double> x, double alpha, Rng& rng) {
  std::vector<double> out(x.begin(), x.end());
  for (auto& v : out) v += alpha * rng.normal();
  return out;
}

DNet::DNet(std::size_t t_ob, std::size_t hidden, Rng& rng)
    : input_width_(t_ob * 2),
      hidden_(hidden),
      w1_(xavier_uniform({input_width_, hidden}, input_width_, hidden, rng)),
      b1_(Tensor::zeros({hidden}, true)),
      w2_(xavier_uniform({hidden, hidden}, hidden, hidden, rng)),
      b2_(Tensor::zeros({hidden}, true)),
      w3_(xavier_uniform({hidden, input_width_}, hidden, input_width_, rng)),
      b3_(Tensor::zeros({input_width_}, true)) {}

Tensor DNet::forward(const Tensor& x_tilde) const {
  if (x_tilde.rank() != 2 || x_tilde.dim(1) != input_width_) {
    throw DimensionError("DNet: expected [B, " + std::to_string(input_width_) + "], got " +
                         shape_str(x_tilde.shape()));
  }
  Tensor h = relu(linear(x_tilde, w1_, b1_));
  h = relu(linear(h, w2_, b2_));
  return linear(h, w3_, b3_);
}

ParamList DNet::params() const {
  return {{"dnet.w1", w1_}, {"dnet.b1", b1_}, {"dnet.w2", w2_},
          {"dnet.b2", b2_}, {"dnet.w3", w3_}, {"dnet.b3", b3_}};
}

std::vector<double> diversify(std::span<const double> x_tilde, const DNet& dnet) {
  if (x_tilde.size() != dnet.input_width()) {
    throw DimensionError("diversify: trajectory of " + std::to_string(x_tilde.size()) +
                         " values, DNet expects " + std::to_string(dnet.input_width()));
  }
  NoGradGuard no_grad;
  Tensor in = Tensor::constant({1, x_tilde.size()}, {x_tilde.begin(), x_tilde.end()});
  Tensor out = dnet.forward(in);
  return {out.data().begin(), out.data().end()};
}

Tensor dnet_loss(const Tensor& x, const Tensor& x_prime, double delta) {
  return huber(x_prime, x, delta);
}

DiversityMetrics diversity_metrics(std::span<const std::vector<double>> originals,
                                   std::span<const std::vector<double>> diversified) {
  if (originals.empty()) throw ValidationError("diversity_metrics: empty input");
  if (originals.size() != diversified.size()) {
    throw ValidationError("diversity_metrics: " + std::to_string(originals.size()) +
                          " originals vs " + std::to_string(diversified.size()) + " diversified");
  }
  double sq = 0.0, abs_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    if (originals[i].size() != diversified[i].size()) {
      throw ValidationError("diversity_metrics: pair " + std::to_string(i) + " differs in length");
    }
    for (std::size_t j = 0; j < originals[i].size(); ++j) {
      const double e = diversified[i][j] - originals[i][j];
      sq += e * e;
      abs_sum += std::abs(e);
    }
    count += originals[i].size();
  }
  if (count == 0) throw ValidationError("diversity_metrics: empty trajectories");
  DiversityMetrics m;
  m.mse = sq / static_cast<double>(count);
  m.mae = abs_sum / static_cast<double>(count);
  m.rmse = std::sqrt(m.mse);
  return m;
}

}  // namespace ccf
