#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccf/clustering.hpp"
#include "ccf/data.hpp"
#include "ccf/subnet.hpp"
#include "ccf/training.hpp"

namespace ccf {

// Mean Euclidean distance over timesteps of two flattened (x, y) trajectories.
double ade(std::span<const double> pred, std::span<const double> gt);
// Euclidean distance at the final timestep.
double fde(std::span<const double> pred, std::span<const double> gt);

struct BestOfN {
  double min_ade = 0.0;
  double min_fde = 0.0;
  std::size_t ade_index = 0;
  std::size_t fde_index = 0;
};

// Independent minima of ADE and FDE over `count` candidates stored back to
// back in `candidates`. Ties go to the lowest index.
BestOfN best_of_n(std::span<const double> candidates, std::size_t count, std::span<const double> gt);

struct WindowRecord {
  std::size_t window = 0;
  std::int64_t pedestrian_id = 0;
  std::int64_t start_frame = 0;
  double ade = 0.0;  // of the most probable candidate
  double fde = 0.0;
  double min_ade = 0.0;
  double min_fde = 0.0;
  std::size_t selected = 0;        // position within `candidates`
  std::size_t best_ade_index = 0;  // position within `candidates`
  std::size_t best_fde_index = 0;
  std::array<double, 2> origin{0.0, 0.0};
  std::vector<double> past;        // normalized, t_ob * 2
  std::vector<double> future;      // normalized, t_pred * 2
  std::vector<std::size_t> candidate_classes;
  std::vector<double> candidates;  // normalized, n * t_pred * 2
};

struct EvalReport {
  double ade = 0.0;
  double fde = 0.0;
  double min_ade = 0.0;  // minADE over the evaluated candidates (minADE20 by default)
  double min_fde = 0.0;
  std::size_t n_best = 20;
  std::string config_digest;
  std::vector<WindowRecord> records;
};

struct EvalOptions {
  // Candidates scored per window: the n_best most probable classes.
  std::size_t n_best = 20;
  std::size_t batch_size = 64;
  std::string config_digest;
};

EvalReport evaluate(std::span<const TrajectoryWindow> windows, const Subnet& subnet,
                    const TrajectoryClassSet& classes, const EvalOptions& options = {});
// Subnet A of a training state on the original observed trajectories.
EvalReport evaluate(std::span<const TrajectoryWindow> windows, const TrainingState& state);

// Dataset means recomputed from per-window records.
EvalReport aggregate(std::vector<WindowRecord> records, std::size_t n_best, std::string digest);

std::string report_csv(const EvalReport& report);
std::string report_table(const EvalReport& report);
std::string records_csv(const EvalReport& report);
std::vector<WindowRecord> parse_records_csv(std::string_view text);

}  // namespace ccf
