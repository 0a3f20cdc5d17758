// ccf: data synthesis, anchor fitting, training, evaluation and plotting.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ccf/checkpoint.hpp"
#include "ccf/clustering.hpp"
#include "ccf/config.hpp"
#include "ccf/data.hpp"
#include "ccf/errors.hpp"
#include "ccf/evaluation.hpp"
#include "ccf/io.hpp"
#include "ccf/plot.hpp"
#include "ccf/training.hpp"

namespace fs = std::filesystem;
using namespace ccf;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
};

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Manifest {
 public:
  Manifest(std::string command, int argc, char** argv) {
    doc_["command"] = std::move(command);
    doc_["argv"] = std::vector<std::string>(argv, argv + argc);
    doc_["started_at"] = utc_now();
  }
  json& operator[](const char* key) { return doc_[key]; }
  void config(const CcfConfig& c, const std::string& path) {
    doc_["config_path"] = path;
    doc_["seed"] = c.seed;
    doc_["config"] = format_config(c);
    doc_["config_digest"] = config_digest(c);
  }
  void input(const std::string& name, const fs::path& path) {
    doc_["inputs"][name] = {{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}};
  }
  void output(const std::string& name, const fs::path& path) {
    doc_["outputs"][name] = {{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}};
  }
  void write(const fs::path& path) const { write_file_atomic(path, doc_.dump(2) + "\n"); }

 private:
  json doc_;
};

CcfConfig resolve_config(const Common& common) {
  CcfConfig config = common.config_path.empty() ? CcfConfig{} : load_config(common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (common.seed) config.seed = *common.seed;
  config.validate();
  return config;
}

WindowOptions window_options(const CcfConfig& c) {
  WindowOptions w;
  w.t_ob = c.t_ob;
  w.t_pred = c.t_pred;
  w.max_neighbors = c.max_neighbors;
  return w;
}

WindowSplit load_split(const fs::path& data, const CcfConfig& config) {
  auto windows = make_windows(load_scene(data), window_options(config));
  if (windows.empty()) {
    throw ValidationError(data.string() + ": no complete " + std::to_string(config.t_ob + config.t_pred) +
                          "-step windows");
  }
  return split_chronological(std::move(windows), config.train_fraction);
}

void apply_ablation(CcfConfig& config, const std::string& ablation) {
  if (ablation == "no-secondary") {
    config.no_secondary_task = true;
  } else if (ablation == "no-crosscorr") {
    config.no_cross_correction = true;
  } else if (ablation.rfind("diversity=", 0) == 0) {
    config.diversity_mode = parse_diversity_mode(ablation.substr(10));
  } else if (ablation.rfind("loss=", 0) == 0) {
    config.traj_loss = parse_trajectory_loss(ablation.substr(5));
  } else {
    throw UsageError("unknown ablation '" + ablation +
                     "' (expected no-secondary, no-crosscorr, diversity=MODE, loss=huber|mse)");
  }
}

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config_path, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", common.seed, "override the configured seed");
  cmd->add_option("--out-dir", common.out_dir, "directory for outputs and the run manifest");
  cmd->add_option("--set", common.overrides, "override one configuration key (key=value)");
}

// ---------------------------------------------------------------- commands

struct SynthArgs {
  std::size_t peds = 20;
  std::size_t frames = 100;
  double noise_sd = 0.0;
  std::string mix = "1,1,1";
  std::string out;
};

int cmd_synth(const SynthArgs& a, const Common& common, Manifest& manifest) {
  const CcfConfig config = resolve_config(common);
  const std::size_t window = config.t_ob + config.t_pred;
  if (a.frames < window) {
    throw UsageError("--frames " + std::to_string(a.frames) + " is shorter than one window (" +
                     std::to_string(window) + " frames)");
  }
  if (a.peds == 0) throw UsageError("--peds must be positive");
  if (!(a.noise_sd >= 0.0)) throw UsageError("--noise-sd must be nonnegative");
  SynthOptions options;
  options.n_pedestrians = a.peds;
  options.n_frames = a.frames;
  options.noise_sd = a.noise_sd;
  options.min_track = window;
  double w[3];
  if (std::sscanf(a.mix.c_str(), "%lf,%lf,%lf", &w[0], &w[1], &w[2]) != 3 || w[0] < 0 || w[1] < 0 ||
      w[2] < 0 || w[0] + w[1] + w[2] <= 0) {
    throw UsageError("--mix expects three nonnegative weights 'cv,turn,stop', got '" + a.mix + "'");
  }
  options.motion_mix = {w[0], w[1], w[2]};
  Rng rng(config.seed);
  const Scene scene = synth_scene(options, rng);

  const fs::path out = a.out.empty() ? fs::path(common.out_dir) / "scene.txt" : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_scene(scene, out);
  manifest.config(config, common.config_path);
  manifest["synth"] = {{"peds", a.peds}, {"frames", a.frames}, {"noise_sd", a.noise_sd}, {"mix", a.mix},
                       {"records", scene.records.size()}};
  manifest.output("scene", out);
  manifest.write(out.string() + ".manifest.json");
  std::cout << "wrote " << scene.records.size() << " records to " << out.string() << "\n";
  return kOk;
}

int cmd_cluster(const std::string& data, const Common& common, Manifest& manifest) {
  const CcfConfig config = resolve_config(common);
  const WindowSplit split = load_split(data, config);
  const TrajectoryClassSet classes = fit_training_classes(split.train, config);
  const fs::path dir(common.out_dir);
  fs::create_directories(dir);
  std::string csv = "class";
  for (std::size_t t = 0; t < config.t_pred; ++t) csv += ",x" + std::to_string(t) + ",y" + std::to_string(t);
  csv += "\n";
  for (std::size_t j = 0; j < classes.k; ++j) {
    csv += std::to_string(j);
    for (double v : classes.mean(j)) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), ",%.17g", v);
      csv += buf;
    }
    csv += "\n";
  }
  const fs::path out = dir / "classes.csv";
  write_file_atomic(out, csv);
  manifest.config(config, common.config_path);
  manifest.input("data", data);
  manifest["train_windows"] = split.train.size();
  manifest.output("classes", out);
  manifest.write(dir / "manifest.json");
  std::cout << "fitted " << classes.k << " classes on " << split.train.size() << " windows\n";
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::vector<std::string> ablate;
  std::string resume;
};

int cmd_train(const TrainArgs& a, const Common& common, Manifest& manifest) {
  std::optional<TrainingState> state;
  CcfConfig config;
  if (!a.resume.empty()) {
    if (!a.ablate.empty() || !common.config_path.empty() || common.seed) {
      throw UsageError("--resume continues the stored configuration; only --set epochs=N may change");
    }
    state = load_checkpoint(a.resume);
    config = state->config;
    for (const auto& kv : common.overrides) {
      if (kv.rfind("epochs=", 0) != 0) throw UsageError("--resume only accepts --set epochs=N");
      set_config_value(config, "epochs", kv.substr(7));
    }
    config.validate();
    state->config = config;
  } else {
    config = resolve_config(common);
    for (const auto& ablation : a.ablate) apply_ablation(config, ablation);
    config.validate();
  }
  const WindowSplit split = load_split(a.data, config);
  if (!state) state = TrainingState::create(config, fit_training_classes(split.train, config));

  const fs::path dir(common.out_dir);
  fs::create_directories(dir);
  std::string log = "epoch,steps," + LossBreakdown::csv_header() + "\n";
  while (state->epoch < config.epochs) {
    const EpochSummary summary = train_epoch(split.train, *state);
    log += std::to_string(summary.epoch) + "," + std::to_string(summary.steps) + "," +
           summary.mean.csv_row() + "\n";
    std::fprintf(stderr, "epoch %llu/%zu  l_total %.6f\n", static_cast<unsigned long long>(summary.epoch),
                 config.epochs, summary.mean.l_total);
  }
  const fs::path checkpoint = dir / "checkpoint.ccf";
  const fs::path log_path = dir / "epochs.csv";
  save_checkpoint(*state, checkpoint);
  write_file_atomic(log_path, log);

  manifest.config(config, common.config_path);
  manifest.input("data", a.data);
  if (!a.resume.empty()) manifest.input("resume", a.resume);
  manifest["ablate"] = a.ablate;
  manifest["train_windows"] = split.train.size();
  if (!config.single_subnet) {
    const DiversityMetrics d = measure_diversity(split.train, *state);
    manifest["diversity"] = {{"mode", std::string(to_string(config.diversity_mode))},
                             {"mse", d.mse}, {"mae", d.mae}, {"rmse", d.rmse}};
  }
  manifest["weights_digest"] = weights_digest(*state);
  manifest.output("checkpoint", checkpoint);
  manifest.output("epoch_log", log_path);
  manifest.write(dir / "manifest.json");
  std::cout << "trained " << state->epoch << " epochs, checkpoint " << checkpoint.string() << "\n";
  return kOk;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
};

int cmd_eval(const EvalArgs& a, const Common& common, Manifest& manifest) {
  const TrainingState state = load_checkpoint(a.checkpoint);
  CcfConfig config = state.config;
  if (!common.config_path.empty() || !common.overrides.empty()) {
    const CcfConfig requested = resolve_config(common);
    if (requested.t_ob != config.t_ob || requested.t_pred != config.t_pred ||
        requested.max_neighbors != config.max_neighbors) {
      throw ValidationError("checkpoint expects t_ob=" + std::to_string(config.t_ob) +
                            " t_pred=" + std::to_string(config.t_pred) +
                            " max_neighbors=" + std::to_string(config.max_neighbors) +
                            ", data configuration has t_ob=" + std::to_string(requested.t_ob) +
                            " t_pred=" + std::to_string(requested.t_pred) +
                            " max_neighbors=" + std::to_string(requested.max_neighbors));
    }
    config.train_fraction = requested.train_fraction;
  }
  WindowSplit split = load_split(a.data, config);
  std::vector<TrajectoryWindow> windows;
  if (a.split == "test") {
    windows = std::move(split.test);
  } else if (a.split == "train") {
    windows = std::move(split.train);
  } else {
    windows = std::move(split.train);
    windows.insert(windows.end(), split.test.begin(), split.test.end());
  }
  const EvalReport report = evaluate(windows, state);

  const fs::path dir(common.out_dir);
  fs::create_directories(dir);
  const fs::path report_path = dir / "report.csv";
  const fs::path records_path = dir / "records.csv";
  const fs::path table_path = dir / "report.txt";
  write_file_atomic(report_path, report_csv(report));
  write_file_atomic(records_path, records_csv(report));
  write_file_atomic(table_path, report_table(report));
  manifest.config(config, common.config_path);
  manifest.input("checkpoint", a.checkpoint);
  manifest.input("data", a.data);
  manifest["split"] = a.split;
  manifest["metrics"] = {{"ade", report.ade}, {"fde", report.fde}, {"min_ade", report.min_ade},
                         {"min_fde", report.min_fde}, {"n_best", report.n_best}};
  manifest.output("report", report_path);
  manifest.output("records", records_path);
  manifest.output("table", table_path);
  manifest.write(dir / "manifest.json");
  std::cout << report_table(report);
  return kOk;
}

struct PlotArgs {
  std::string records;
  std::size_t index = 0;
  std::string out;
};

int cmd_plot(const PlotArgs& a, const Common& common, Manifest& manifest) {
  const auto records = parse_records_csv(read_file(a.records));
  const std::string svg = render_svg(records, a.index);
  const fs::path out = a.out.empty() ? fs::path(common.out_dir) / ("window_" + std::to_string(a.index) + ".svg")
                                     : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file_atomic(out, svg);
  manifest.input("records", a.records);
  manifest["index"] = a.index;
  manifest.output("svg", out);
  manifest.write(out.string() + ".manifest.json");
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-correction trajectory predictor"};
  app.require_subcommand(1);
  Common common;

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic scene in whitespace-separated text format");
  add_common(s, common);
  s->add_option("--peds", synth.peds, "number of pedestrians")->check(CLI::PositiveNumber);
  s->add_option("--frames", synth.frames, "number of timestamps");
  s->add_option("--noise-sd", synth.noise_sd, "position noise standard deviation (m)");
  s->add_option("--mix", synth.mix, "motion weights: constant velocity, turning, stop-and-go");
  s->add_option("--out", synth.out, "scene file (default OUT_DIR/scene.txt)");

  std::string cluster_data;
  auto* c = app.add_subcommand("cluster", "fit trajectory anchors on the training windows");
  add_common(c, common);
  c->add_option("--data", cluster_data, "scene file")->required()->check(CLI::ExistingFile);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train both subnets and write a checkpoint");
  add_common(t, common);
  t->add_option("--data", train.data, "scene file")->required()->check(CLI::ExistingFile);
  t->add_option("--ablate", train.ablate, "no-secondary, no-crosscorr, diversity=MODE, loss=huber|mse");
  t->add_option("--resume", train.resume, "continue from a checkpoint")->check(CLI::ExistingFile);

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate subnet A of a checkpoint");
  add_common(e, common);
  e->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  e->add_option("--data", eval.data, "scene file")->required()->check(CLI::ExistingFile);
  e->add_option("--split", eval.split, "test, train or all")->check(CLI::IsMember({"test", "train", "all"}));

  PlotArgs plot;
  auto* p = app.add_subcommand("plot", "draw one evaluated window as SVG");
  add_common(p, common);
  p->add_option("--records", plot.records, "records.csv from eval")->required()->check(CLI::ExistingFile);
  p->add_option("--index", plot.index, "window index")->required();
  p->add_option("--out", plot.out, "SVG file (default OUT_DIR/window_INDEX.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  Manifest manifest(name, argc, argv);
  try {
    if (name == "synth") return cmd_synth(synth, common, manifest);
    if (name == "cluster") return cmd_cluster(cluster_data, common, manifest);
    if (name == "train") return cmd_train(train, common, manifest);
    if (name == "eval") return cmd_eval(eval, common, manifest);
    return cmd_plot(plot, common, manifest);
  } catch (const ccf::UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const ccf::NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return kNumerical;
  } catch (const ccf::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kData;
  }
}
