#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cred/belief.hpp"
#include "cred/error.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cred;
using cred::testing::vec;

namespace {

PreferenceRecord record(FeatureVector a, FeatureVector b, int label) {
  PreferenceRecord r;
  r.phi_a = std::move(a);
  r.phi_b = std::move(b);
  r.label = label;
  return r;
}

std::vector<PreferenceRecord> three_records() {
  return {record(vec({2.0, 0.0}), vec({0.0, 0.0}), +1), record(vec({0.0, 1.5}), vec({1.0, 0.0}), +1),
          record(vec({1.0, 3.0}), vec({0.0, 0.0}), -1)};
}

Eigen::MatrixXd gaussian_cloud(int n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::MatrixXd s(2, n);
  for (int i = 0; i < n; ++i) s.col(i) << normal(rng), normal(rng);
  return s;
}

}  // namespace

TEST(Likelihood, FeatureDifference) {
  EXPECT_EQ(feature_difference(vec({2, 0, 1}), vec({1, 1, 1})), vec({1, -1, 0}));
  EXPECT_EQ(feature_difference(vec({2, 0, 1}), vec({2, 0, 1})), FeatureVector::Zero(3));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int k = 0; k < 100; ++k) {
    FeatureVector a = vec({n(rng), n(rng), n(rng)}), b = vec({n(rng), n(rng), n(rng)});
    EXPECT_EQ(feature_difference(a, b), -feature_difference(b, a));
  }
  EXPECT_THROW(feature_difference(vec({1, 2}), vec({1, 2, 3})), ShapeError);
}

TEST(Likelihood, TiedRewardsGiveOneHalf) {
  EXPECT_DOUBLE_EQ(preference_likelihood(vec({0.3, 0.4}), vec({1, 1}), vec({1, 1}), +1), 0.5);
  EXPECT_DOUBLE_EQ(preference_likelihood(vec({0.3, 0.4}), vec({1, 1}), vec({1, 1}), -1), 0.5);
}

TEST(Likelihood, ClosedFormSigmoid) {
  EXPECT_NEAR(preference_likelihood(vec({1, 0}), vec({1, 0}), vec({0, 0}), +1), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(preference_likelihood(vec({1, 0}), vec({1, 0}), vec({0, 0}), +1), 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Likelihood, StableAtLargeMargins) {
  // exp(-50) / (1 + exp(-50)) in high precision: 1.9287498479639177e-22.
  EXPECT_NEAR(label_probability(-50.0, +1) / 1.9287498479639177e-22, 1.0, 1e-12);
  EXPECT_EQ(label_probability(50.0, +1), 1.0);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-800.0)));
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-12);
}

TEST(Likelihood, LabelsSumToOne) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int k = 0; k < 1000; ++k) {
    FeatureVector w = vec({n(rng), n(rng), n(rng)}), a = vec({n(rng), n(rng), n(rng)}), b = vec({n(rng), n(rng), n(rng)});
    EXPECT_NEAR(preference_likelihood(w, a, b, +1) + preference_likelihood(w, a, b, -1), 1.0, 1e-12);
  }
}

TEST(Likelihood, DependsOnlyOnTheDifference) {
  // Integer-valued inputs keep the shifted difference exact.
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(-5, 5);
  for (int k = 0; k < 200; ++k) {
    FeatureVector w = vec({0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng)});
    FeatureVector a = vec({1.0 * u(rng), 1.0 * u(rng), 1.0 * u(rng)}), b = vec({1.0 * u(rng), 1.0 * u(rng), 1.0 * u(rng)});
    FeatureVector c = vec({1.0 * u(rng), 1.0 * u(rng), 1.0 * u(rng)});
    EXPECT_EQ(preference_likelihood(w, a, b, +1), preference_likelihood(w, a + c, b + c, +1));
  }
}

TEST(Posterior, PriorOnlyAndSupport) {
  EXPECT_EQ(posterior_logdensity(vec({0.2, 0.3}), {}), 0.0);
  std::vector<PreferenceRecord> tie{record(vec({1, 1}), vec({1, 1}), +1)};
  EXPECT_NEAR(posterior_logdensity(vec({0.2, 0.3}), tie), std::log(0.5), 1e-15);
  EXPECT_EQ(posterior_logdensity(vec({1.2, 0.0}), tie), -std::numeric_limits<double>::infinity());
}

TEST(Mcmc, UniformDiskWithoutRecords) {
  auto e = adaptive_metropolis({}, 2, {5000, 2000, 5}, 4);
  ASSERT_EQ(e.size(), 5000);
  double norm = 0.0;
  for (int i = 0; i < e.size(); ++i) norm += e.sample(i).norm();
  EXPECT_NEAR(norm / e.size(), 2.0 / 3.0, 0.03);
}

TEST(Mcmc, MatchesGridQuadratureOnThreeRecords) {
  const auto records = three_records();
  auto e = adaptive_metropolis(records, 2, {20000, 2000, 5}, 5);
  const Eigen::Vector2d truth = oracle::disk_posterior_mean([&](const Eigen::Vector2d& w) {
    double l = 0.0;
    for (const auto& r : records) l += std::log(preference_likelihood(w, r.phi_a, r.phi_b, r.label));
    return l;
  });
  const Eigen::VectorXd mean = e.mean();
  EXPECT_NEAR(mean[0], truth[0], 0.05);
  EXPECT_NEAR(mean[1], truth[1], 0.05);
  for (int i = 0; i < e.size(); ++i) EXPECT_LE(e.sample(i).norm(), 1.0);
  EXPECT_GE(e.acceptance_rate, 0.1);
  EXPECT_LE(e.acceptance_rate, 0.6);
}

TEST(Mcmc, SameSeedSameEnsemble) {
  const auto records = three_records();
  auto a = adaptive_metropolis(records, 2, {200, 500, 5}, 9);
  auto b = adaptive_metropolis(records, 2, {200, 500, 5}, 9);
  EXPECT_EQ(a.samples, b.samples);
  auto c = adaptive_metropolis(records, 2, {200, 500, 5}, 10);
  EXPECT_NE(a.samples, c.samples);
}

TEST(Mcmc, RejectsBadOptions) {
  EXPECT_THROW(adaptive_metropolis({}, 2, {10, 10, 0}, 1), ConfigError);
  EXPECT_THROW(adaptive_metropolis({}, 0, {10, 10, 1}, 1), ShapeError);
}

TEST(Kde, NearGaussianClosedFormForNarrowClouds) {
  // Scott smoothing widens the variance by (1 + n^(-1/3)) in 2-d, so the
  // estimate sits ln(1 + 5000^(-1/3)) nats above the closed form.
  const double sigma = 0.1;
  const double closed = std::log(2.0 * std::numbers::pi * std::numbers::e * sigma * sigma);
  const double h = kde_entropy(gaussian_cloud(5000, sigma, 6), 400);
  EXPECT_NEAR(h, closed, 0.05 * std::abs(closed));
  EXPECT_NEAR(h - closed, std::log(1.0 + std::pow(5000.0, -1.0 / 3.0)), 0.03);
}

TEST(Kde, GridQuadratureMatchesMonteCarlo) {
  const Eigen::MatrixXd s = gaussian_cloud(1000, 0.15, 7);
  const Eigen::VectorXd bw = scott_bandwidths(s);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, 999);
  std::normal_distribution<double> normal(0.0, 1.0);
  double mc = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd c = s.col(pick(rng));
    const Eigen::Vector2d x(c[0] + bw[0] * normal(rng), c[1] + bw[1] * normal(rng));
    mc -= kde_log_density(s, bw, x);
  }
  mc /= draws;
  const double grid = kde_entropy(s, 300);
  EXPECT_NEAR(grid, mc, 0.02 * std::abs(mc));
}

TEST(Kde, HalvingSpreadLowersEntropy) {
  const Eigen::MatrixXd s = gaussian_cloud(2000, 0.2, 9);
  EXPECT_LT(kde_entropy(s / 2.0, 200), kde_entropy(s, 200));
}

TEST(Kde, ZeroSpreadIsMinusInfinity) {
  Eigen::MatrixXd s(2, 3);
  s << 0.1, 0.1, 0.1, 0.2, 0.3, 0.4;
  EXPECT_EQ(kde_entropy(s, 50), -std::numeric_limits<double>::infinity());
}

TEST(Kde, ScottBandwidth) {
  Eigen::MatrixXd s(1, 4);
  s << 0, 1, 2, 3;
  const double sd = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(scott_bandwidths(s)[0], std::pow(4.0, -0.2) * sd, 1e-15);
}
