#include "ccf/training.hpp"

#include <cmath>
#include <cstdio>

#include "ccf/errors.hpp"
#include "ccf/ops.hpp"

namespace ccf {
namespace {

constexpr std::uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kNoiseStream = 0xbf58476d1ce4e5b9ULL;
constexpr std::uint64_t kClusterStream = 0x94d049bb133111ebULL;
constexpr std::uint64_t kMeasureStream = 0xd6e8feb86659fd93ULL;

double value_or_zero(const Tensor& t) { return t.defined() ? t.item() : 0.0; }

Tensor accumulate(const Tensor& total, const Tensor& term) {
  if (!term.defined()) return total;
  return total.defined() ? total + term : term;
}

}  // namespace

std::vector<double> transform_inputs(std::span<const double> past, std::size_t b, std::size_t t_ob,
                                     const CcfConfig& cfg, Rng& rng) {
  std::vector<double> input(past.begin(), past.end());
  switch (cfg.diversity_mode) {
    case DiversityMode::dnet:
    case DiversityMode::noise:
      input = perturb(input, cfg.alpha, rng);
      break;
    case DiversityMode::drop:
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t first = rng.index(t_ob);
        std::size_t second = rng.index(t_ob - 1);
        if (second >= first) ++second;
        for (std::size_t t : {first, second}) {
          input[(i * t_ob + t) * 2] = 0.0;
          input[(i * t_ob + t) * 2 + 1] = 0.0;
        }
      }
      break;
    case DiversityMode::mask:
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t start = rng.index(t_ob - 1);
        for (std::size_t t = start; t < start + 2; ++t) {
          input[(i * t_ob + t) * 2] = 0.0;
          input[(i * t_ob + t) * 2 + 1] = 0.0;
        }
      }
      break;
  }
  return input;
}

DiversityMetrics measure_diversity(std::span<const TrajectoryWindow> windows, const TrainingState& state) {
  if (windows.empty()) throw ValidationError("measure_diversity: no windows");
  const CcfConfig& cfg = state.config;
  Rng rng(cfg.seed ^ kMeasureStream);
  std::vector<std::vector<double>> originals, diversified;
  originals.reserve(windows.size());
  diversified.reserve(windows.size());
  for (const auto& w : windows) {
    std::vector<double> x = transform_inputs(w.past, 1, cfg.t_ob, cfg, rng);
    if (cfg.diversity_mode == DiversityMode::dnet) x = diversify(x, state.dnet);
    originals.push_back(w.past);
    diversified.push_back(std::move(x));
  }
  return diversity_metrics(originals, diversified);
}

double LossBreakdown::recompose(double lambda) const {
  return l_div + (l_traj_a + l_cls_a) + (l_traj_b + l_cls_b) + lambda * (l_cor_a + l_cor_b);
}

std::string LossBreakdown::csv_header() {
  return "l_div,l_traj_a,l_cls_a,l_traj_b,l_cls_b,l_cor_a,l_cor_b,l_total";
}

std::string LossBreakdown::csv_row() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", l_div,
                l_traj_a, l_cls_a, l_traj_b, l_cls_b, l_cor_a, l_cor_b, l_total);
  return buf;
}

void adam_update(const ParamList& params, AdamState& state, double learning_rate) {
  if (state.first_moment.size() != params.size()) {
    state.first_moment.resize(params.size());
    state.second_moment.resize(params.size());
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(kAdamBeta1, t);
  const double correction2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i].tensor;
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    if (m.size() != p.size()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto values = p.mutable_data();
    for (std::size_t j = 0; j < values.size(); ++j) {
      m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * g[j];
      v[j] = kAdamBeta2 * v[j] + (1.0 - kAdamBeta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      values[j] -= learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEpsilon);
    }
  }
}

TrainingState TrainingState::create(const CcfConfig& config, TrajectoryClassSet classes) {
  config.validate();
  if (classes.k != config.k || classes.t_pred != config.t_pred) {
    throw ValidationError("class set (k = " + std::to_string(classes.k) + ", t_pred = " +
                          std::to_string(classes.t_pred) + ") does not match config");
  }
  Rng init(config.seed);
  const SubnetShape shape = SubnetShape::from_config(config);
  Subnet a(shape, init);
  Subnet b(shape, init);
  DNet dnet(config.t_ob, config.dnet_hidden, init);
  return TrainingState{config,
                       std::move(classes),
                       std::move(a),
                       std::move(b),
                       std::move(dnet),
                       AdamState{},
                       0,
                       Rng(config.seed ^ kShuffleStream),
                       Rng(config.seed ^ kNoiseStream)};
}

ParamList TrainingState::trainable() const {
  ParamList out;
  for (auto& p : subnet_a.params()) out.push_back({"a." + p.name, p.tensor});
  if (config.single_subnet) return out;
  for (auto& p : subnet_b.params()) out.push_back({"b." + p.name, p.tensor});
  if (config.diversity_mode == DiversityMode::dnet) {
    for (auto& p : dnet.params()) out.push_back(p);
  }
  return out;
}

TrajectoryClassSet fit_training_classes(std::span<const TrajectoryWindow> windows,
                                        const CcfConfig& config) {
  std::vector<double> futures;
  for (const auto& w : windows) {
    if (w.t_pred != config.t_pred) {
      throw ValidationError("window prediction length " + std::to_string(w.t_pred) +
                            " does not match config t_pred " + std::to_string(config.t_pred));
    }
    futures.insert(futures.end(), w.future.begin(), w.future.end());
  }
  Rng rng(config.seed ^ kClusterStream);
  return fit_classes(futures, config.t_pred, config.k, rng);
}

LossBreakdown LossGraph::breakdown() const {
  LossBreakdown out;
  out.l_div = value_or_zero(l_div);
  out.l_traj_a = value_or_zero(l_traj_a);
  out.l_cls_a = value_or_zero(l_cls_a);
  out.l_traj_b = value_or_zero(l_traj_b);
  out.l_cls_b = value_or_zero(l_cls_b);
  out.l_cor_a = value_or_zero(l_cor_a);
  out.l_cor_b = value_or_zero(l_cor_b);
  out.l_total = value_or_zero(l_total);
  return out;
}

std::pair<Tensor, Tensor> subnet_loss(const SubnetBatchOutput& output, const Tensor& future,
                                      const Tensor& class_targets,
                                      std::span<const std::size_t> nearest, const CcfConfig& config) {
  Tensor chosen = pick(output.candidates, nearest);
  Tensor traj = config.traj_loss == TrajectoryLoss::mse ? mse(chosen, future)
                                                          : huber(chosen, future, config.huber_delta);
  Tensor cls;
  if (!config.no_secondary_task) cls = cross_entropy(output.class_probs, class_targets);
  return {traj, cls};
}

std::pair<Tensor, Tensor> cross_correction_losses(const Tensor& candidates_a,
                                                  const Tensor& candidates_b, double delta) {
  if (candidates_a.shape() != candidates_b.shape()) {
    throw ValidationError("cross-correction: candidate shapes " + shape_str(candidates_a.shape()) +
                          " and " + shape_str(candidates_b.shape()) + " differ");
  }
  return {huber(candidates_a, candidates_b.detach(), delta),
          huber(candidates_b, candidates_a.detach(), delta)};
}

LossGraph build_losses(std::span<const TrajectoryWindow> windows, TrainingState& state) {
  const CcfConfig& cfg = state.config;
  const SubnetBatch batch = make_batch(windows);
  const std::size_t b = batch.size;
  const std::size_t t_ob = cfg.t_ob;

  std::vector<double> targets;
  targets.reserve(b * cfg.k);
  std::vector<std::size_t> nearest(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto p = ground_truth_class_probs(windows[i].future, state.classes);
    targets.insert(targets.end(), p.begin(), p.end());
    nearest[i] = nearest_class(windows[i].future, state.classes);
  }
  const Tensor class_targets = Tensor::constant({b, cfg.k}, std::move(targets));

  LossGraph g;
  g.out_a = state.subnet_a.forward(batch, state.classes);
  std::tie(g.l_traj_a, g.l_cls_a) = subnet_loss(g.out_a, batch.future, class_targets, nearest, cfg);

  if (!cfg.single_subnet) {
    std::vector<double> input = transform_inputs(batch.past.data(), b, t_ob, cfg, state.noise_rng);
    Tensor input_b = Tensor::constant({b, t_ob * 2}, std::move(input));
    if (cfg.diversity_mode == DiversityMode::dnet) {
      Tensor diversified = state.dnet.forward(input_b);
      g.l_div = dnet_loss(batch.past, diversified, cfg.huber_delta);
      input_b = cfg.dnet_grad_from_b ? diversified : diversified.detach();
    }
    g.input_b = input_b;
    g.out_b = state.subnet_b.forward(input_b, batch.neighbor, batch.neighbor_valid, state.classes);
    std::tie(g.l_traj_b, g.l_cls_b) =
        subnet_loss(*g.out_b, batch.future, class_targets, nearest, cfg);
    if (!cfg.no_cross_correction) {
      std::tie(g.l_cor_a, g.l_cor_b) =
          cross_correction_losses(g.out_a.candidates, g.out_b->candidates, cfg.huber_delta);
    }
  }

  Tensor total = accumulate(accumulate(g.l_traj_a, g.l_cls_a), Tensor());
  if (g.l_div.defined()) total = g.l_div + total;
  if (g.l_traj_b.defined()) total = total + accumulate(g.l_traj_b, g.l_cls_b);
  if (g.l_cor_a.defined()) total = total + (g.l_cor_a + g.l_cor_b) * cfg.lambda;
  g.l_total = total;
  return g;
}

LossBreakdown train_step(std::span<const TrajectoryWindow> batch, TrainingState& state) {
  if (batch.empty()) throw ValidationError("train_step: empty batch");
  const ParamList params = state.trainable();
  zero_grads(params);
  LossGraph graph = build_losses(batch, state);
  const LossBreakdown losses = graph.breakdown();
  const std::pair<const char*, double> components[] = {
      {"l_div", losses.l_div},     {"l_traj_a", losses.l_traj_a}, {"l_cls_a", losses.l_cls_a},
      {"l_traj_b", losses.l_traj_b}, {"l_cls_b", losses.l_cls_b}, {"l_cor_a", losses.l_cor_a},
      {"l_cor_b", losses.l_cor_b}, {"l_total", losses.l_total}};
  for (const auto& [name, value] : components) {
    if (!std::isfinite(value)) {
      throw NumericalError(std::string("non-finite loss component ") + name + " at step " +
                           std::to_string(state.optimizer.step + 1));
    }
  }
  graph.l_total.backward();
  adam_update(params, state.optimizer, state.config.learning_rate);
  return losses;
}

EpochSummary train_epoch(std::span<const TrajectoryWindow> windows, TrainingState& state,
                         const std::function<void(const LossBreakdown&)>& on_step) {
  if (windows.empty()) throw ValidationError("train_epoch: no training windows");
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[state.shuffle_rng.index(i)]);
  }
  EpochSummary summary;
  std::vector<TrajectoryWindow> batch;
  const std::size_t batch_size = state.config.batch_size;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    batch.clear();
    for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
      batch.push_back(windows[order[i]]);
    }
    const LossBreakdown step = train_step(batch, state);
    if (on_step) on_step(step);
    summary.mean.l_div += step.l_div;
    summary.mean.l_traj_a += step.l_traj_a;
    summary.mean.l_cls_a += step.l_cls_a;
    summary.mean.l_traj_b += step.l_traj_b;
    summary.mean.l_cls_b += step.l_cls_b;
    summary.mean.l_cor_a += step.l_cor_a;
    summary.mean.l_cor_b += step.l_cor_b;
    summary.mean.l_total += step.l_total;
    ++summary.steps;
  }
  const double n = static_cast<double>(summary.steps);
  for (double* v : {&summary.mean.l_div, &summary.mean.l_traj_a, &summary.mean.l_cls_a,
                    &summary.mean.l_traj_b, &summary.mean.l_cls_b, &summary.mean.l_cor_a,
                    &summary.mean.l_cor_b, &summary.mean.l_total}) {
    *v /= n;
  }
  summary.epoch = ++state.epoch;
  return summary;
}

}  // namespace ccf
