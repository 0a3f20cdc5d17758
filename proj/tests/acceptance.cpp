// Acceptance suite: one PASS/FAIL line per criterion. Run with no arguments
// for the full suite or with criterion numbers to run a subset.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccf/checkpoint.hpp"
#include "ccf/config.hpp"
#include "ccf/data.hpp"
#include "ccf/dnet.hpp"
#include "ccf/evaluation.hpp"
#include "ccf/ops.hpp"
#include "ccf/subnet.hpp"
#include "ccf/training.hpp"
#include "fixtures.hpp"
#include "support.hpp"

namespace ccf {
namespace {

using Clock = std::chrono::steady_clock;
using test::check_gradients;
using test::probe;
using test::random_param;
using test::random_values;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. gradients

struct GradCase {
  std::string name;
  std::vector<std::pair<std::string, Tensor>> params;
  std::function<Tensor()> loss;
};

std::vector<GradCase> primitive_cases(Rng& rng) {
  std::vector<GradCase> cases;
  auto p = [&](Shape s, double lo = -1.0, double hi = 1.0) { return random_param(s, rng, lo, hi); };
  {
    auto a = p({3, 4}), row = p({4}), col = p({3, 1});
    cases.push_back({"add", {{"a", a}, {"row", row}}, [=] { return probe(a + row); }});
    cases.push_back({"sub", {{"a", a}, {"col", col}}, [=] { return probe(a - col); }});
    cases.push_back({"mul", {{"a", a}, {"col", col}}, [=] { return probe(a * col); }});
    cases.push_back({"scale", {{"a", a}}, [=] { return probe(a * -2.5); }});
  }
  {
    auto a = p({2, 3, 4}), b = p({2, 4, 5}), w = p({4, 3});
    cases.push_back({"matmul", {{"a", a}, {"b", b}}, [=] { return probe(matmul(a, b)); }});
    cases.push_back({"matmul_shared", {{"a", a}, {"w", w}}, [=] { return probe(matmul(a, w)); }});
  }
  {
    auto x = p({2, 3, 4}), w = p({4, 5}), b = p({5});
    cases.push_back({"linear", {{"x", x}, {"w", w}, {"b", b}}, [=] { return probe(linear(x, w, b)); }});
  }
  {
    auto x = p({5, 6});
    cases.push_back({"relu", {{"x", x}}, [=] { return probe(relu(x)); }});
  }
  {
    auto x = p({3, 6}, -2, 2), g = p({6}), s = p({6});
    cases.push_back({"layer_norm", {{"x", x}, {"gain", g}, {"shift", s}}, [=] { return probe(layer_norm(x, g, s)); }});
  }
  for (std::size_t axis = 0; axis < 3; ++axis) {
    auto x = p({2, 3, 4}, -3, 3);
    cases.push_back({"softmax_axis" + std::to_string(axis), {{"x", x}}, [=] { return probe(softmax(x, axis)); }});
  }
  {
    auto a = p({2, 3}), b = p({2, 2}), c = p({1, 3});
    cases.push_back({"concat", {{"a", a}, {"b", b}, {"c", c}},
                     [=] { return probe(concat({a, b}, 1)) + probe(concat({a, c}, 0), 5); }});
  }
  {
    auto x = p({2, 3, 4});
    std::vector<std::size_t> idx{2, 0};
    cases.push_back({"reshape", {{"x", x}}, [=] { return probe(reshape(x, {4, 6})); }});
    cases.push_back({"pick", {{"x", x}}, [=] { return probe(pick(x, idx)); }});
    cases.push_back({"sum_mean", {{"x", x}}, [=] { return sum(x * x) + mean(relu(x)) * 3.0; }});
  }
  {
    auto pred = p({4, 3}, -3, 3), target = p({4, 3}, -3, 3);
    cases.push_back({"huber", {{"pred", pred}, {"target", target}}, [=] { return huber(pred, target, 0.7); }});
    cases.push_back({"mse", {{"pred", pred}, {"target", target}}, [=] { return mse(pred, target); }});
  }
  {
    auto logits = p({3, 5}, -2, 2);
    auto target = Tensor::constant({3, 5}, {0.2, 0.3, 0.1, 0.4, 0.0, 0, 0, 1, 0, 0, 0.5, 0, 0, 0, 0.5});
    cases.push_back({"cross_entropy", {{"logits", logits}}, [=] { return cross_entropy(softmax(logits, 1), target); }});
  }
  {
    auto q = p({2, 3, 4}), k = p({2, 5, 4}), v = p({2, 5, 4});
    std::vector<std::uint8_t> valid{1, 0, 1, 1, 0, 0, 1, 1, 0, 1};
    cases.push_back({"attention", {{"q", q}, {"k", k}, {"v", v}},
                     [=] { return probe(attention(q, k, v, 2, valid)); }});
  }
  {
    auto dnet = std::make_shared<DNet>(4, 12, rng);
    auto x = Tensor::constant({3, 8}, random_values(24, rng, -2, 2));
    auto xt = p({3, 8}, -2, 2);
    auto params = test::named(dnet->params());
    params.emplace_back("x_tilde", xt);
    cases.push_back({"dnet", params, [=] { return dnet_loss(x, dnet->forward(xt)); }});
  }
  {
    auto ca = p({2, 3, 4, 2}, -2, 2), cb = p({2, 3, 4, 2}, -2, 2);
    // Only the live side of each term is differentiable.
    cases.push_back({"cross_correction_a", {{"a", ca}}, [=] { return cross_correction_losses(ca, cb).first; }});
    cases.push_back({"cross_correction_b", {{"b", cb}}, [=] { return cross_correction_losses(ca, cb).second; }});
  }
  return cases;
}

Outcome criterion_gradients() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (auto& c : primitive_cases(rng)) {
    const auto r = check_gradients(c.params, c.loss);
    checked += r.checked;
    if (r.worst > worst) worst = r.worst, where = c.name + " " + r.where;
  }

  SubnetShape s;
  s.t_ob = 4;
  s.t_pred = 6;
  s.k = 3;
  s.d = 8;
  s.heads = 2;
  s.ff_width = 16;
  const Subnet net(s, rng);
  TrajectoryClassSet classes;
  classes.k = 3;
  classes.t_pred = 6;
  classes.means = random_values(36, rng, -3, 3);
  std::vector<TrajectoryWindow> windows(2);
  for (auto& w : windows) {
    w.t_ob = 4;
    w.t_pred = 6;
    w.past = random_values(8, rng, -2, 2);
    w.future = random_values(12, rng, -2, 2);
    w.neighbors = random_values(3 * 8, rng, -4, 4);
    w.neighbor_valid = {1, 1, 1};
  }
  windows[1].neighbor_valid = {1, 0, 1};
  const SubnetBatch batch = make_batch(windows);
  const auto e2e = check_gradients(test::named(net.params()), [&] {
    const auto out = net.forward(batch, classes);
    return probe(out.candidates) + probe(out.class_probs, 7);
  });
  const double secs = seconds_since(t0);
  const bool pass = worst <= 1e-4 && e2e.worst <= 1e-3 && secs < 60.0;
  return {pass, fmt("primitives worst %.2e (%zu checks%s%s), subnet K=3 D=8 worst %.2e (%zu checks), %.1fs", worst,
                    checked, worst > 1e-4 ? ", at " : "", worst > 1e-4 ? where.c_str() : "", e2e.worst, e2e.checked,
                    secs)};
}

// ---------------------------------------------------------------------------
// 2. loss recomposition

Outcome criterion_recomposition() {
  const auto windows = test::synthetic_windows(20, 60, 21);
  std::size_t steps = 0;
  double worst = 0.0;
  struct Variant {
    DiversityMode mode;
    bool no_secondary, no_cross;
    TrajectoryLoss loss;
  };
  const std::vector<Variant> variants{
      {DiversityMode::dnet, false, false, TrajectoryLoss::huber},
      {DiversityMode::noise, false, false, TrajectoryLoss::huber},
      {DiversityMode::drop, false, false, TrajectoryLoss::mse},
      {DiversityMode::mask, true, false, TrajectoryLoss::huber},
      {DiversityMode::dnet, false, true, TrajectoryLoss::huber},
  };
  std::uint64_t seed = 1;
  while (steps < 600) {
    for (const auto& v : variants) {
      CcfConfig cfg = test::small_config();
      cfg.seed = seed++;
      cfg.diversity_mode = v.mode;
      cfg.no_secondary_task = v.no_secondary;
      cfg.no_cross_correction = v.no_cross;
      cfg.traj_loss = v.loss;
      cfg.lambda = 0.05 * static_cast<double>(cfg.seed % 7);
      TrainingState state = test::small_state(windows, cfg);
      train_epoch(windows, state, [&](const LossBreakdown& b) {
        worst = std::max(worst, std::abs(b.l_total - b.recompose(cfg.lambda)));
        ++steps;
      });
    }
  }
  return {worst <= 1e-9, fmt("%zu steps, worst |l_total - recomposed| %.2e", steps, worst)};
}

// ---------------------------------------------------------------------------
// 3. stop-gradient contract

Outcome criterion_stop_gradient() {
  Rng pick_rng(33);
  std::size_t batches = 0, nonzero_frozen = 0, dead_live = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto windows = test::synthetic_windows(15, 50, 300 + seed);
    CcfConfig cfg = test::small_config();
    cfg.seed = seed;
    TrainingState state = test::small_state(windows, cfg);
    train_epoch(windows, state);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<TrajectoryWindow> batch;
      for (int i = 0; i < 6; ++i) batch.push_back(windows[pick_rng.index(windows.size())]);
      const ParamList a = state.subnet_a.params(), b = state.subnet_b.params();
      for (int term = 0; term < 2; ++term) {
        const ParamList& live = term == 0 ? a : b;
        const ParamList& frozen = term == 0 ? b : a;
        zero_grads(state.trainable());
        LossGraph g = build_losses(batch, state);
        (term == 0 ? g.l_cor_a : g.l_cor_b).backward();
        for (const auto& p : frozen) {
          for (double v : p.tensor.grad()) nonzero_frozen += v != 0.0;
        }
        bool any = false;
        for (const auto& p : live) {
          for (double v : p.tensor.grad()) any |= v != 0.0;
        }
        dead_live += !any;
      }
      ++batches;
    }
  }
  return {nonzero_frozen == 0 && dead_live == 0,
          fmt("%zu random batches, %zu nonzero gradients on the target subnet, %zu terms with no live gradient",
              batches, nonzero_frozen, dead_live)};
}

// ---------------------------------------------------------------------------
// 4-6. ablation benchmark

struct Benchmark {
  std::vector<TrajectoryWindow> train, test;
};

Benchmark make_benchmark() {
  SynthOptions opt;
  opt.n_pedestrians = 60;
  opt.n_frames = 100;
  opt.noise_sd = 0.02;
  Rng rng(2024);
  WindowOptions wo;
  wo.max_neighbors = 8;
  auto all = make_windows(synth_scene(opt, rng), wo);
  all.resize(std::min<std::size_t>(2000, all.size()));
  auto split = split_chronological(std::move(all), 0.8);
  return {std::move(split.train), std::move(split.test)};
}

CcfConfig desk_config(std::uint64_t seed) {
  CcfConfig c;
  c.k = 20;
  c.d = 32;
  c.heads = 4;
  c.ff_mult = 2;
  c.dnet_hidden = 64;
  c.max_neighbors = 8;
  c.batch_size = 32;
  c.epochs = 30;
  c.seed = seed;
  return c;
}

struct RunResult {
  EvalReport report;
  DiversityMetrics diversity;
};

RunResult train_and_evaluate(const Benchmark& bench, const CcfConfig& cfg) {
  TrainingState state = TrainingState::create(cfg, fit_training_classes(bench.train, cfg));
  while (state.epoch < cfg.epochs) train_epoch(bench.train, state);
  return {evaluate(bench.test, state), measure_diversity(bench.test, state)};
}

struct AblationResults {
  double full = 0, no_cross = 0, no_secondary = 0, mse = 0;
  RunResult full_seed1;
  double seconds = 0;
};

const AblationResults& ablations(const Benchmark& bench) {
  static std::optional<AblationResults> cached;
  if (cached) return *cached;
  AblationResults r;
  const auto t0 = Clock::now();
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  for (std::uint64_t seed : seeds) {
    CcfConfig cfg = desk_config(seed);
    auto full = train_and_evaluate(bench, cfg);
    if (seed == 1) r.full_seed1 = full;
    r.full += full.report.min_ade;
    cfg = desk_config(seed);
    cfg.no_cross_correction = true;
    r.no_cross += train_and_evaluate(bench, cfg).report.min_ade;
    cfg = desk_config(seed);
    cfg.no_secondary_task = true;
    r.no_secondary += train_and_evaluate(bench, cfg).report.min_ade;
    cfg = desk_config(seed);
    cfg.traj_loss = TrajectoryLoss::mse;
    r.mse += train_and_evaluate(bench, cfg).report.min_ade;
    std::printf("  seed %llu done (%.0fs)\n", static_cast<unsigned long long>(seed), seconds_since(t0));
    std::fflush(stdout);
  }
  const double n = static_cast<double>(seeds.size());
  r.full /= n;
  r.no_cross /= n;
  r.no_secondary /= n;
  r.mse /= n;
  r.seconds = seconds_since(t0);
  cached = r;
  return *cached;
}

Outcome criterion_ablation_trend(const Benchmark& bench) {
  const auto& r = ablations(bench);
  const bool order = r.full <= r.no_cross && r.no_cross <= r.no_secondary;
  const bool margin = r.full <= 0.97 * r.no_cross;
  const bool pass = order && margin && r.seconds < 1800.0;
  return {pass, fmt("test minADE20 mean of 3 seeds: full %.4f, no cross-correction %.4f, no secondary %.4f "
                    "(full %.1f%% below no cross-correction), %.0fs",
                    r.full, r.no_cross, r.no_secondary, 100.0 * (1.0 - r.full / r.no_cross), r.seconds)};
}

Outcome criterion_loss_choice(const Benchmark& bench) {
  const auto& r = ablations(bench);
  return {r.full <= r.mse, fmt("test minADE20 mean of 3 seeds: huber %.4f, mse %.4f", r.full, r.mse)};
}

Outcome criterion_diversity(const Benchmark& bench) {
  const auto& r = ablations(bench);
  const DiversityMetrics& m = r.full_seed1.diversity;
  bool pass = m.mse > 0.0 && std::abs(m.rmse - std::sqrt(m.mse)) <= 1e-9;
  std::printf("  %-6s %10s %10s %10s %10s %10s\n", "mode", "minADE20", "minFDE20", "mse", "mae", "rmse");
  for (DiversityMode mode : {DiversityMode::dnet, DiversityMode::noise, DiversityMode::drop, DiversityMode::mask}) {
    RunResult run;
    if (mode == DiversityMode::dnet) {
      run = r.full_seed1;
    } else {
      CcfConfig cfg = desk_config(1);
      cfg.diversity_mode = mode;
      run = train_and_evaluate(bench, cfg);
    }
    const auto& d = run.diversity;
    std::printf("  %-6s %10.4f %10.4f %10.6f %10.6f %10.6f\n", std::string(to_string(mode)).c_str(),
                run.report.min_ade, run.report.min_fde, d.mse, d.mae, d.rmse);
    pass = pass && std::isfinite(run.report.min_ade) && std::abs(d.rmse - std::sqrt(d.mse)) <= 1e-9;
  }
  std::fflush(stdout);
  return {pass, fmt("trained DNet mse %.6f mae %.6f rmse %.6f, |rmse - sqrt(mse)| %.1e, four modes compared",
                    m.mse, m.mae, m.rmse, std::abs(m.rmse - std::sqrt(m.mse)))};
}

// ---------------------------------------------------------------------------
// 7. overfit and properties

double train_min_ade_after_overfit(std::size_t steps) {
  MotionMix cv{1.0, 0.0, 0.0};
  auto windows = test::synthetic_windows(40, 60, 77, cv, 0.0, 4);
  windows.resize(64);
  CcfConfig cfg = test::small_config();
  cfg.k = 20;
  cfg.d = 32;
  cfg.heads = 4;
  cfg.dnet_hidden = 64;
  cfg.batch_size = 64;
  cfg.seed = 5;
  TrainingState state = test::small_state(windows, cfg);
  std::size_t done = 0;
  while (done < steps) done += train_epoch(windows, state).steps;
  return evaluate(windows, state).min_ade;
}

std::size_t mask_invariance_failures(Rng& rng) {
  std::size_t failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t b = 1 + rng.index(3), lq = 1 + rng.index(4), lk = 1 + rng.index(6);
    const std::size_t heads = 1 + rng.index(2), d = heads * (1 + rng.index(4));
    std::vector<std::uint8_t> valid(b * lk);
    for (auto& f : valid) f = rng.uniform() < 0.6;
    const Tensor q = Tensor::constant({b, lq, d}, random_values(b * lq * d, rng, -3, 3));
    auto kv = random_values(b * lk * d, rng, -3, 3);
    auto vv = random_values(b * lk * d, rng, -3, 3);
    const Tensor before =
        attention(q, Tensor::constant({b, lk, d}, kv), Tensor::constant({b, lk, d}, vv), heads, valid);
    for (std::size_t i = 0; i < b * lk; ++i) {
      if (valid[i]) continue;
      for (std::size_t c = 0; c < d; ++c) {
        kv[i * d + c] = rng.uniform(-1e6, 1e6);
        vv[i * d + c] = rng.uniform(-1e6, 1e6);
      }
    }
    const Tensor after =
        attention(q, Tensor::constant({b, lk, d}, kv), Tensor::constant({b, lk, d}, vv), heads, valid);
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(before[i]) != std::bit_cast<std::uint64_t>(after[i])) {
        ++failures;
        break;
      }
    }
  }
  return failures;
}

std::size_t monotonicity_failures(Rng& rng) {
  std::size_t failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t t = 1 + rng.index(12), n = 1 + rng.index(20);
    const auto gt = random_values(t * 2, rng, -3, 3);
    auto cands = random_values(n * t * 2, rng, -3, 3);
    const auto before = best_of_n(cands, n, gt);
    const auto extra = random_values(t * 2, rng, -3, 3);
    cands.insert(cands.begin() + static_cast<std::ptrdiff_t>(rng.index(n + 1) * t * 2), extra.begin(), extra.end());
    const auto after = best_of_n(cands, n + 1, gt);
    failures += after.min_ade > before.min_ade || after.min_fde > before.min_fde;
  }
  return failures;
}

Outcome criterion_overfit() {
  const double min_ade = train_min_ade_after_overfit(2000);
  Rng rng(707);
  const std::size_t mono = monotonicity_failures(rng);
  const std::size_t mask = mask_invariance_failures(rng);
  return {min_ade < 0.05 && mono == 0 && mask == 0,
          fmt("train minADE20 %.4f after 2000 steps on 64 constant-velocity windows; "
              "best-of-n monotonicity failures %zu/1000, mask invariance failures %zu/1000",
              min_ade, mono, mask)};
}

// ---------------------------------------------------------------------------
// 8. reproducibility

Outcome criterion_reproducibility() {
  const auto windows = test::synthetic_windows(20, 60, 88);
  auto split = split_chronological(windows, 0.8);
  CcfConfig cfg = test::small_config();
  cfg.epochs = 3;
  auto run = [&](std::size_t epochs) {
    TrainingState s = test::small_state(split.train, cfg);
    while (s.epoch < epochs) train_epoch(split.train, s);
    return s;
  };
  const TrainingState a = run(3), b = run(3);
  const std::string bytes_a = serialize_checkpoint(a), bytes_b = serialize_checkpoint(b);
  const EvalReport ra = evaluate(split.test, a), rb = evaluate(split.test, b);
  const bool same_ckpt = bytes_a == bytes_b;
  const bool same_report = report_csv(ra) == report_csv(rb) && records_csv(ra) == records_csv(rb);

  TrainingState resumed = deserialize_checkpoint(serialize_checkpoint(run(1)));
  while (resumed.epoch < 3) train_epoch(split.train, resumed);
  const bool resume_equal = serialize_checkpoint(resumed) == bytes_a &&
                            records_csv(evaluate(split.test, resumed)) == records_csv(ra);
  return {same_ckpt && same_report && resume_equal,
          fmt("checkpoints %s (%zu bytes), reports %s, 1+2 epoch resume %s 3 straight epochs",
              same_ckpt ? "identical" : "DIFFER", bytes_a.size(), same_report ? "identical" : "DIFFER",
              resume_equal ? "equals" : "DIFFERS from")};
}

}  // namespace
}  // namespace ccf

int main(int argc, char** argv) {
  using namespace ccf;
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };

  std::optional<Benchmark> bench;
  auto benchmark = [&]() -> const Benchmark& {
    if (!bench) bench = make_benchmark();
    return *bench;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient suite", criterion_gradients},
      {"loss recomposition", criterion_recomposition},
      {"stop-gradient contract", criterion_stop_gradient},
      {"ablation trend", [&] { return criterion_ablation_trend(benchmark()); }},
      {"loss-choice trend", [&] { return criterion_loss_choice(benchmark()); }},
      {"diversity measurement", [&] { return criterion_diversity(benchmark()); }},
      {"overfit and properties", criterion_overfit},
      {"reproducibility", criterion_reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!wanted(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
