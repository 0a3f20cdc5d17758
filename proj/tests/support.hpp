#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccf/dnet.hpp"
#include "ccf/ops.hpp"
#include "ccf/params.hpp"
#include "ccf/rng.hpp"
#include "ccf/tensor.hpp"

namespace ccf::test {

inline std::vector<double> random_values(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline Tensor random_param(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor::parameter(shape, random_values(numel(shape), rng, lo, hi));
}

// Weighted sum with fixed random weights so that every output element
// contributes a distinct gradient.
inline Tensor probe(const Tensor& out, std::uint64_t seed = 99) {
  Rng rng(seed);
  return sum(out * Tensor::constant(out.shape(), random_values(out.size(), rng)));
}

// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
};

// Compares the analytic gradient of loss() with respect to every element of
// every tensor in `params` against central differences with step h.
inline GradCheck check_gradients(const std::vector<std::pair<std::string, Tensor>>& params,
                                 const std::function<Tensor()>& loss, double h = 1e-5,
                                 std::size_t max_per_tensor = SIZE_MAX) {
  for (auto [name, p] : params) p.zero_grad();
  loss().backward();
  GradCheck result;
  for (auto [name, p] : params) {
    const std::vector<double> analytic = p.grad();
    auto values = p.mutable_data();
    const std::size_t stride = std::max<std::size_t>(1, values.size() / std::min(values.size(), max_per_tensor));
    for (std::size_t i = 0; i < values.size(); i += stride) {
      const double saved = values[i];
      double plus, minus;
      {
        NoGradGuard guard;
        values[i] = saved + h;
        plus = loss().item();
        values[i] = saved - h;
        minus = loss().item();
      }
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double err = relative_error(analytic[i], numeric);
      ++result.checked;
      if (err > result.worst) {
        result.worst = err;
        result.where = name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic[i]) +
                       " numeric " + std::to_string(numeric);
      }
    }
  }
  return result;
}

inline std::vector<std::pair<std::string, Tensor>> named(const ParamList& params) {
  std::vector<std::pair<std::string, Tensor>> out;
  for (const auto& p : params) out.emplace_back(p.name, p.tensor);
  return out;
}

// Sets DNet weights so that its output equals its input exactly:
// relu(x) - relu(-x) = x through the first 2 * width hidden units.
inline void make_identity(DNet& dnet) {
  const std::size_t w = dnet.input_width(), h = dnet.hidden();
  if (h < 2 * w) throw std::invalid_argument("identity DNet needs hidden >= 2 * input width");
  auto params = dnet.params();
  for (auto& p : params) {
    auto v = p.tensor.mutable_data();
    std::fill(v.begin(), v.end(), 0.0);
  }
  auto w1 = params[0].tensor.mutable_data();  // [w, h]
  auto w2 = params[2].tensor.mutable_data();  // [h, h]
  auto w3 = params[4].tensor.mutable_data();  // [h, w]
  for (std::size_t i = 0; i < w; ++i) {
    w1[i * h + i] = 1.0;
    w1[i * h + w + i] = -1.0;
    w3[i * w + i] = 1.0;
    w3[(w + i) * w + i] = -1.0;
  }
  for (std::size_t i = 0; i < 2 * w; ++i) w2[i * h + i] = 1.0;
}

inline void expect_close(std::span<const double> a, std::span<const double> b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "at " << i;
}

}  // namespace ccf::test
