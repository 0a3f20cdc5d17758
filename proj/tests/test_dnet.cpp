#include <gtest/gtest.h>

#include <cmath>

#include "ccf/dnet.hpp"
#include "ccf/errors.hpp"
#include "support.hpp"

namespace ccf {
namespace {

TEST(Perturb, ZeroAlphaIsIdentity) {
  Rng data(1), rng(2);
  const auto x = test::random_values(16, data);
  EXPECT_EQ(perturb(x, 0.0, rng), x);
}

TEST(Perturb, ReproducibleForFixedSeed) {
  Rng data(1);
  const auto x = test::random_values(16, data);
  Rng a(3), b(3);
  EXPECT_EQ(perturb(x, 0.1, a), perturb(x, 0.1, b));
}

TEST(Perturb, MonteCarloStandardDeviation) {
  Rng rng(4);
  const std::vector<double> x(16, 0.5);
  const int n = 100000 / 16 + 1;
  double s = 0, s2 = 0;
  std::size_t count = 0;
  for (int i = 0; i < n; ++i) {
    for (double v : perturb(x, 0.1, rng)) {
      const double e = v - 0.5;
      s += e;
      s2 += e * e;
      ++count;
    }
  }
  const double mean = s / count;
  const double sd = std::sqrt(s2 / count - mean * mean);
  EXPECT_NEAR(sd, 0.1, 0.002);
}

TEST(Diversify, ZeroWeightsGiveZeros) {
  Rng rng(5);
  DNet dnet(8, 64, rng);
  for (auto& p : dnet.params()) {
    auto v = p.tensor.mutable_data();
    std::fill(v.begin(), v.end(), 0.0);
  }
  Rng data(6);
  for (double v : diversify(test::random_values(16, data), dnet)) EXPECT_EQ(v, 0.0);
}

TEST(Diversify, ShapePreservedAndIdentityHarness) {
  Rng rng(7);
  DNet dnet(8, 64, rng);
  Rng data(8);
  const auto x = test::random_values(16, data, -4, 4);
  EXPECT_EQ(diversify(x, dnet).size(), 16u);
  test::make_identity(dnet);
  EXPECT_EQ(diversify(x, dnet), x);
  EXPECT_THROW(diversify(test::random_values(14, data), dnet), DimensionError);
}

TEST(DNetLoss, Examples) {
  Rng data(9);
  const auto xv = test::random_values(16, data);
  const Tensor x = Tensor::constant({1, 16}, xv);
  EXPECT_EQ(dnet_loss(x, x).item(), 0.0);
  std::vector<double> shifted = xv;
  for (auto& v : shifted) v += 0.5;
  EXPECT_DOUBLE_EQ(dnet_loss(x, Tensor::constant({1, 16}, shifted)).item(), 0.125);

  const auto yv = test::random_values(16, data, -3, 3);
  long double ref = 0;
  for (std::size_t i = 0; i < 16; ++i) {
    const long double e = std::abs(static_cast<long double>(yv[i]) - xv[i]);
    ref += e <= 1 ? 0.5L * e * e : e - 0.5L;
  }
  EXPECT_NEAR(dnet_loss(x, Tensor::constant({1, 16}, yv)).item(), static_cast<double>(ref / 16), 1e-15);
}

TEST(DNetLoss, GradientWrtParameters) {
  Rng rng(10);
  DNet dnet(8, 12, rng);
  // Nonzero biases so that hidden units sit away from the relu kink.
  for (auto& p : dnet.params()) {
    if (p.name.find(".b") == std::string::npos) continue;
    for (auto& v : p.tensor.mutable_data()) v = rng.uniform(-0.3, 0.3);
  }
  Rng data(11);
  const Tensor x = Tensor::constant({4, 16}, test::random_values(64, data, -2, 2));
  const Tensor x_tilde = Tensor::constant({4, 16}, perturb(x.data(), 0.1, data));
  const auto r = test::check_gradients(test::named(dnet.params()),
                                       [&] { return dnet_loss(x, dnet.forward(x_tilde)); });
  EXPECT_LT(r.worst, 1e-3) << r.where;
}

TEST(DiversityMetrics, Examples) {
  Rng data(12);
  std::vector<std::vector<double>> a, b, c;
  for (int i = 0; i < 5; ++i) {
    a.push_back(test::random_values(16, data));
    b.push_back(a.back());
    c.push_back(a.back());
    for (auto& v : c.back()) v += 1.0;
  }
  const auto same = diversity_metrics(a, b);
  EXPECT_EQ(same.mse, 0.0);
  EXPECT_EQ(same.mae, 0.0);
  EXPECT_EQ(same.rmse, 0.0);
  const auto offset = diversity_metrics(a, c);
  EXPECT_NEAR(offset.mse, 1.0, 1e-12);
  EXPECT_NEAR(offset.mae, 1.0, 1e-12);
  EXPECT_NEAR(offset.rmse, 1.0, 1e-12);
  EXPECT_THROW(diversity_metrics(std::vector<std::vector<double>>{}, std::vector<std::vector<double>>{}),
               ValidationError);
  EXPECT_THROW(diversity_metrics(a, std::span(c).first(3)), ValidationError);
}

TEST(DiversityMetrics, MatchesScalarAccumulationAndRmseIsSqrtMse) {
  Rng data(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> a, b;
    const std::size_t n = 1 + data.index(20);
    long double se = 0, ae = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a.push_back(test::random_values(16, data, -5, 5));
      b.push_back(test::random_values(16, data, -5, 5));
      for (std::size_t j = 0; j < 16; ++j) {
        const long double e = static_cast<long double>(a[i][j]) - b[i][j];
        se += e * e;
        ae += std::abs(e);
      }
    }
    const auto m = diversity_metrics(a, b);
    EXPECT_NEAR(m.mse, static_cast<double>(se / (n * 16)), 1e-12);
    EXPECT_NEAR(m.mae, static_cast<double>(ae / (n * 16)), 1e-12);
    EXPECT_NEAR(m.rmse, std::sqrt(m.mse), 1e-9);
  }
}

}  // namespace
}  // namespace ccf
