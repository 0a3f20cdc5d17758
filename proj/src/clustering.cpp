#include "ccf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccf/errors.hpp"

namespace ccf {
namespace {

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

ClusterFit fit_classes_traced(std::span<const double> futures, std::size_t t_pred, std::size_t k,
                              Rng& rng) {
  const std::size_t width = t_pred * 2;
  if (width == 0 || futures.size() % width != 0) {
    throw ValidationError("fit_classes: futures do not divide into trajectories of " +
                          std::to_string(t_pred) + " steps");
  }
  const std::size_t m = futures.size() / width;
  if (k < 2) throw ValidationError("fit_classes: k must be at least 2");
  if (m < k) {
    throw ValidationError("fit_classes: " + std::to_string(m) + " futures cannot form " +
                          std::to_string(k) + " classes");
  }
  auto point = [&](std::size_t i) { return futures.data() + i * width; };

  ClusterFit fit;
  fit.classes.k = k;
  fit.classes.t_pred = t_pred;
  fit.classes.seed = rng.seed();
  auto& means = fit.classes.means;
  means.assign(k * width, 0.0);

  // k-means++ seeding.
  std::vector<double> nearest(m, std::numeric_limits<double>::infinity());
  std::size_t first = rng.index(m);
  std::copy_n(point(first), width, means.begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(point(i), means.data() + (c - 1) * width, width));
      total += nearest[i];
    }
    if (total <= 0.0) {
      throw ValidationError("fit_classes: fewer than " + std::to_string(k) + " distinct futures");
    }
    double target = rng.uniform() * total;
    std::size_t chosen = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (nearest[i] <= 0.0) continue;
      chosen = i;
      target -= nearest[i];
      if (target < 0.0) break;
    }
    std::copy_n(point(chosen), width, means.begin() + static_cast<std::ptrdiff_t>(c * width));
  }

  std::vector<std::size_t> assignment(m, k);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < kKMeansMaxIterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = squared_distance(point(i), means.data() + c * width, width);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed = changed || assignment[i] != best;
      assignment[i] = best;
      objective += best_d;
    }
    fit.objective.push_back(objective);
    fit.iterations = iter + 1;
    if (!changed) break;

    std::fill(means.begin(), means.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      ++counts[assignment[i]];
      double* dst = means.data() + assignment[i] * width;
      for (std::size_t j = 0; j < width; ++j) dst[j] += point(i)[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < width; ++j) means[c * width + j] /= static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (counts[assignment[i]] <= 1) continue;
        const double d = squared_distance(point(i), means.data() + assignment[i] * width, width);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[assignment[far]];
      assignment[far] = c;
      counts[c] = 1;
      std::copy_n(point(far), width, means.begin() + static_cast<std::ptrdiff_t>(c * width));
    }
  }
  return fit;
}

TrajectoryClassSet fit_classes(std::span<const double> futures, std::size_t t_pred, std::size_t k,
                               Rng& rng) {
  return fit_classes_traced(futures, t_pred, k, rng).classes;
}

std::vector<double> class_distances(std::span<const double> y, const TrajectoryClassSet& classes) {
  if (y.size() != classes.width()) {
    throw ValidationError("trajectory of " + std::to_string(y.size()) +
                          " values does not match classes of width " +
                          std::to_string(classes.width()));
  }
  std::vector<double> d(classes.k);
  for (std::size_t j = 0; j < classes.k; ++j) {
    d[j] = squared_distance(y.data(), classes.mean(j).data(), y.size());
  }
  return d;
}

std::vector<double> ground_truth_class_probs(std::span<const double> y,
                                             const TrajectoryClassSet& classes) {
  std::vector<double> p = class_distances(y, classes);
  const double closest = *std::min_element(p.begin(), p.end());
  double total = 0.0;
  for (auto& v : p) {
    v = std::exp(closest - v);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

std::size_t nearest_class(std::span<const double> y, const TrajectoryClassSet& classes) {
  const auto d = class_distances(y, classes);
  return static_cast<std::size_t>(std::min_element(d.begin(), d.end()) - d.begin());
}

}  // namespace ccf
