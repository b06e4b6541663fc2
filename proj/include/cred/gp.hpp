#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace cred {

struct GpHyperparams {
  double signal_variance = 1.0;
  Eigen::VectorXd length_scales;  // one per input dimension (ARD)
  double noise_variance = 1e-6;
};

struct GpPrediction {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Squared-exponential ARD kernel.
double se_kernel(const GpHyperparams& hp, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Gaussian-process regression with a constant prior mean.
///
/// The Cholesky factor of K + noise I is rebuilt on every update. When the
/// factorization fails, diagonal jitter is escalated up to 1e-4 before
/// NumericalError is thrown.
class GpModel {
 public:
  static constexpr double kMaxJitter = 1e-4;

  GpModel() = default;
  GpModel(int dim, GpHyperparams hp);

  /// By default the prior mean follows the mean of the observations.
  void set_prior_mean(double m);
  void add_observation(const Eigen::VectorXd& x, double y);
  void set_hyperparams(GpHyperparams hp);

  GpPrediction predict(const Eigen::VectorXd& x) const;
  double log_marginal_likelihood() const;

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(ys_.size()); }
  const GpHyperparams& hyperparams() const { return hp_; }
  double prior_mean() const { return prior_mean_; }
  double jitter() const { return jitter_; }
  const std::vector<Eigen::VectorXd>& inputs() const { return xs_; }
  const std::vector<double>& outputs() const { return ys_; }

 private:
  void refactor();

  int dim_ = 0;
  GpHyperparams hp_;
  bool fixed_prior_mean_ = false;
  double prior_mean_ = 0.0;
  double jitter_ = 0.0;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<double> ys_;
  Eigen::MatrixXd chol_;  // lower factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_; // (K + noise I)^-1 (y - m)
};

GpPrediction gp_posterior(const GpModel& model, const Eigen::VectorXd& theta);

struct GpFitOptions {
  double min_scale = 1e-2;  // length-scale bounds relative to box width
  double max_scale = 1e2;
  double variance_floor = 1e-6;
  double noise_floor = 1e-6;
  int restarts = 4;
};

/// Maximizes the log marginal likelihood over log length scales and log
/// signal variance by multi-start coordinate search. The current
/// hyperparameters are one of the starts, so the likelihood never decreases.
/// `box_width` gives the width of each input dimension.
GpModel gp_fit_hyperparams(const GpModel& model, const Eigen::VectorXd& box_width,
                           const GpFitOptions& opts = {}, std::uint64_t seed = 0);

}  // namespace cred
