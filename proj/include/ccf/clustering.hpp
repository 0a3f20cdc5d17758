#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccf/rng.hpp"

namespace ccf {

// K anchor futures c_1..c_K, each flattened to t_pred * 2 values.
struct TrajectoryClassSet {
  std::size_t k = 0;
  std::size_t t_pred = 0;
  std::uint64_t seed = 0;
  std::vector<double> means;  // k * t_pred * 2

  std::size_t width() const { return t_pred * 2; }
  std::span<const double> mean(std::size_t j) const {
    return std::span<const double>(means).subspan(j * width(), width());
  }
};

struct ClusterFit {
  TrajectoryClassSet classes;
  // Sum of squared distances to the assigned centroid after each assignment.
  std::vector<double> objective;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kKMeansMaxIterations = 100;

// Lloyd's algorithm with k-means++ seeding over flattened futures (each
// t_pred * 2 values, concatenated in `futures`). Runs until assignments stop
// changing or kKMeansMaxIterations. An emptied cluster is re-seeded with the
// point farthest from its current centroid.
ClusterFit fit_classes_traced(std::span<const double> futures, std::size_t t_pred, std::size_t k,
                              Rng& rng);
TrajectoryClassSet fit_classes(std::span<const double> futures, std::size_t t_pred, std::size_t k,
                               Rng& rng);

// Squared Euclidean distance from y to every class mean.
std::vector<double> class_distances(std::span<const double> y, const TrajectoryClassSet& classes);

// softmax_j(-||y - c_j||^2)
std::vector<double> ground_truth_class_probs(std::span<const double> y,
                                             const TrajectoryClassSet& classes);

// Index of the closest class mean; ties go to the lowest index.
std::size_t nearest_class(std::span<const double> y, const TrajectoryClassSet& classes);

}  // namespace ccf
