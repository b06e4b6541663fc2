#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cred/env.hpp"

namespace cred {

/// One answered query. Features are the normalized ones (Phi / horizon).
struct PreferenceRecord {
  FeatureVector phi_a;
  FeatureVector phi_b;
  int label = +1;  // +1: A preferred, -1: B preferred
  std::string env_id;
  int iteration = 0;
};

/// Equally weighted posterior samples over reward weights, one per column.
struct BeliefEnsemble {
  Eigen::MatrixXd samples;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  int burn_in = 0;
  int thin = 1;

  int dim() const { return static_cast<int>(samples.rows()); }
  int size() const { return static_cast<int>(samples.cols()); }
  WeightVector sample(int m) const { return samples.col(m); }
  WeightVector mean() const { return samples.rowwise().mean(); }
};

struct McmcOptions {
  int n_samples = 200;
  int burn_in = 2000;
  int thin = 5;
};

FeatureVector feature_difference(const FeatureVector& phi_a, const FeatureVector& phi_b);

/// Numerically stable logistic function and its log.
double sigmoid(double z);
double log_sigmoid(double z);

/// Boltzmann preference likelihood P(I | w) from the reward margin
/// z = w . (Phi_A - Phi_B).
inline double label_probability(double margin, int label) {
  return sigmoid(label >= 0 ? margin : -margin);
}

/// P(I | w) for a trajectory pair. Throws ShapeError on mismatched dims.
double preference_likelihood(const WeightVector& w, const FeatureVector& phi_a,
                             const FeatureVector& phi_b, int label);

/// Unnormalized log posterior under a uniform prior on the unit ball;
/// -infinity outside the ball.
double posterior_logdensity(const WeightVector& w, std::span<const PreferenceRecord> records);

/// Adaptive Metropolis (Haario et al.) restricted to the unit ball.
///
/// The chain starts at the origin with an isotropic proposal matched to the
/// uniform-ball covariance, s_d I / (d + 2). After burn-in the proposal
/// covariance tracks s_d (Cov(history) + 1e-6 I), s_d = 2.38^2 / d.
/// Proposals outside the ball are rejected.
BeliefEnsemble adaptive_metropolis(std::span<const PreferenceRecord> records, int dim,
                                   const McmcOptions& opts, std::uint64_t seed);

/// Differential entropy (nats) of a Gaussian KDE fit to the ensemble, by
/// quadrature on a regular grid over [-1, 1]^d. Uses Scott's bandwidth
/// n^(-1/(d+4)) sigma_j per dimension. Returns -infinity when some
/// dimension has zero spread.
double belief_entropy_kde(const BeliefEnsemble& ensemble, int grid_points_per_dim);

/// Same, over an arbitrary set of samples (columns).
double kde_entropy(const Eigen::MatrixXd& samples, int grid_points_per_dim);

/// Scott bandwidths used by kde_entropy.
Eigen::VectorXd scott_bandwidths(const Eigen::MatrixXd& samples);

/// Log-density of the Gaussian KDE with the given bandwidths at x.
double kde_log_density(const Eigen::MatrixXd& samples, const Eigen::VectorXd& bandwidths,
                       const Eigen::VectorXd& x);

}  // namespace cred
