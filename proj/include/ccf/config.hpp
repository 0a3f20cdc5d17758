#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ccf {

enum class DiversityMode { dnet, noise, drop, mask };
enum class TrajectoryLoss { huber, mse };

std::string_view to_string(DiversityMode mode);
std::string_view to_string(TrajectoryLoss loss);
DiversityMode parse_diversity_mode(std::string_view text);
TrajectoryLoss parse_trajectory_loss(std::string_view text);

// Every tunable of a run. Defaults follow the standard 8-in / 12-out protocol.
struct CcfConfig {
  std::size_t t_ob = 8;
  std::size_t t_pred = 12;
  std::size_t k = 20;
  std::size_t d = 64;
  std::size_t heads = 4;
  std::size_t ff_mult = 4;
  std::size_t l_e = 1;
  std::size_t l_d = 1;
  std::size_t dnet_hidden = 64;
  std::size_t max_neighbors = 16;
  double alpha = 0.1;
  double lambda = 0.1;
  double huber_delta = 1.0;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  std::size_t n_best = 20;
  bool no_secondary_task = false;
  bool no_cross_correction = false;
  DiversityMode diversity_mode = DiversityMode::dnet;
  TrajectoryLoss traj_loss = TrajectoryLoss::huber;
  // Lets subnet B's losses update DNet through X'.
  bool dnet_grad_from_b = true;
  // Trains subnet A alone: no DNet, no subnet B, no cross-correction.
  bool single_subnet = false;

  std::size_t ff_width() const { return ff_mult * d; }

  // Throws ConfigError on the first violated constraint.
  void validate() const;
  friend bool operator==(const CcfConfig&, const CcfConfig&) = default;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys and malformed
// values are ConfigErrors naming the key. Keys not present keep `base` values.
CcfConfig parse_config(std::string_view text, CcfConfig base = {});
CcfConfig load_config(const std::filesystem::path& path, CcfConfig base = {});
// Applies a single key=value override (used by CLI flags).
void set_config_value(CcfConfig& config, std::string_view key, std::string_view value);
// Canonical text form: every key, fixed order, round-trip exact.
std::string format_config(const CcfConfig& config);
// Short hex digest of the canonical form.
std::string config_digest(const CcfConfig& config);

}  // namespace ccf
