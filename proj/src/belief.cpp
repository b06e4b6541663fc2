#include "cred/belief.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <spdlog/spdlog.h>

#include "cred/error.hpp"
#include "cred/random.hpp"

namespace cred {

FeatureVector feature_difference(const FeatureVector& phi_a, const FeatureVector& phi_b) {
  if (phi_a.size() != phi_b.size())
    throw ShapeError("feature vectors differ in dimension: " + std::to_string(phi_a.size()) +
                     " vs " + std::to_string(phi_b.size()));
  return phi_a - phi_b;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double preference_likelihood(const WeightVector& w, const FeatureVector& phi_a,
                             const FeatureVector& phi_b, int label) {
  const FeatureVector psi = feature_difference(phi_a, phi_b);
  if (w.size() != psi.size()) throw ShapeError("weight and feature dimensions differ");
  return label_probability(w.dot(psi), label);
}

namespace {

// Columns are label * psi, so log P(I | w) = log_sigmoid(column . w).
Eigen::MatrixXd signed_differences(std::span<const PreferenceRecord> records, int dim) {
  Eigen::MatrixXd m(dim, static_cast<Eigen::Index>(records.size()));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const FeatureVector psi = feature_difference(records[r].phi_a, records[r].phi_b);
    if (psi.size() != dim) throw ShapeError("record feature dimension does not match belief");
    m.col(static_cast<Eigen::Index>(r)) = (records[r].label >= 0 ? 1.0 : -1.0) * psi;
  }
  return m;
}

double log_likelihood(const Eigen::MatrixXd& signed_psi, const WeightVector& w) {
  double total = 0.0;
  const Eigen::VectorXd margins = signed_psi.transpose() * w;
  for (Eigen::Index r = 0; r < margins.size(); ++r) total += log_sigmoid(margins[r]);
  return total;
}

}  // namespace

double posterior_logdensity(const WeightVector& w, std::span<const PreferenceRecord> records) {
  if (w.norm() > 1.0) return -std::numeric_limits<double>::infinity();
  return log_likelihood(signed_differences(records, static_cast<int>(w.size())), w);
}

BeliefEnsemble adaptive_metropolis(std::span<const PreferenceRecord> records, int dim,
                                   const McmcOptions& opts, std::uint64_t seed) {
  if (dim < 1) throw ShapeError("belief dimension must be positive");
  if (opts.n_samples < 0 || opts.burn_in < 0 || opts.thin < 1)
    throw ConfigError("MCMC needs n_samples, burn_in >= 0 and thin >= 1");

  const Eigen::MatrixXd signed_psi = signed_differences(records, dim);
  const double scale = 2.38 * 2.38 / dim;
  const double eps_cov = 1e-6;
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Eigen::MatrixXd chol = Eigen::LLT<Eigen::MatrixXd>(scale * identity / (dim + 2.0)).matrixL();

  WeightVector current = WeightVector::Zero(dim);
  double current_logp = log_likelihood(signed_psi, current);

  // Running mean and scatter of the chain history (Welford).
  Eigen::VectorXd hist_mean = current;
  Eigen::MatrixXd hist_scatter = Eigen::MatrixXd::Zero(dim, dim);
  long history = 1;

  BeliefEnsemble out;
  out.seed = seed;
  out.burn_in = opts.burn_in;
  out.thin = opts.thin;
  out.samples.resize(dim, opts.n_samples);

  const long total = static_cast<long>(opts.burn_in) + static_cast<long>(opts.n_samples) * opts.thin;
  long accepted_after_burn_in = 0;
  int kept = 0;
  Eigen::VectorXd z(dim);
  for (long t = 1; t <= total; ++t) {
    if (t > opts.burn_in && history >= 2L * dim) {
      const Eigen::MatrixXd cov = hist_scatter / static_cast<double>(history - 1);
      Eigen::LLT<Eigen::MatrixXd> llt(scale * (cov + eps_cov * identity));
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }
    for (int i = 0; i < dim; ++i) z[i] = normal(rng);
    const WeightVector proposal = current + chol * z;
    const double u = uniform(rng);
    bool accept = false;
    if (proposal.squaredNorm() <= 1.0) {
      const double logp = log_likelihood(signed_psi, proposal);
      if (std::log(u) < logp - current_logp) {
        current = proposal;
        current_logp = logp;
        accept = true;
      }
    }
    if (accept && t > opts.burn_in) ++accepted_after_burn_in;

    ++history;
    const Eigen::VectorXd delta = current - hist_mean;
    hist_mean += delta / static_cast<double>(history);
    hist_scatter += delta * (current - hist_mean).transpose();

    if (t > opts.burn_in && (t - opts.burn_in) % opts.thin == 0) out.samples.col(kept++) = current;
  }
  const long post = total - opts.burn_in;
  out.acceptance_rate = post > 0 ? static_cast<double>(accepted_after_burn_in) / post : 0.0;
  if (post > 0 && (out.acceptance_rate < 0.1 || out.acceptance_rate > 0.6))
    spdlog::debug("adaptive Metropolis acceptance rate {:.3f} outside [0.1, 0.6]",
                  out.acceptance_rate);
  return out;
}

Eigen::VectorXd scott_bandwidths(const Eigen::MatrixXd& samples) {
  const auto d = samples.rows();
  const auto n = samples.cols();
  const double factor = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
  const Eigen::VectorXd mean = samples.rowwise().mean();
  Eigen::VectorXd h(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double ss = (samples.row(j).array() - mean[j]).square().sum();
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    h[j] = factor * sd;
  }
  return h;
}

double kde_log_density(const Eigen::MatrixXd& samples, const Eigen::VectorXd& bandwidths,
                       const Eigen::VectorXd& x) {
  const auto d = samples.rows();
  const auto n = samples.cols();
  double log_norm = -std::log(static_cast<double>(n));
  for (Eigen::Index j = 0; j < d; ++j)
    log_norm -= std::log(bandwidths[j]) + 0.5 * std::log(2.0 * std::numbers::pi);
  Eigen::VectorXd exponents(n);
  for (Eigen::Index i = 0; i < n; ++i)
    exponents[i] = -0.5 * ((x - samples.col(i)).array() / bandwidths.array()).square().sum();
  const double top = exponents.maxCoeff();
  return log_norm + top + std::log((exponents.array() - top).exp().sum());
}

double kde_entropy(const Eigen::MatrixXd& samples, int grid_points_per_dim) {
  if (samples.cols() == 0) throw ShapeError("entropy of an empty ensemble");
  if (grid_points_per_dim < 2) throw ConfigError("entropy grid needs at least 2 points per dim");
  const int d = static_cast<int>(samples.rows());
  const auto n = samples.cols();
  const Eigen::VectorXd h = scott_bandwidths(samples);
  for (int j = 0; j < d; ++j)
    if (!(h[j] > 1e-12)) {
      spdlog::warn("degenerate belief ensemble: zero spread along dimension {}", j);
      return -std::numeric_limits<double>::infinity();
    }

  const int g = grid_points_per_dim;
  const double spacing = 2.0 / g;
  // tables[j](i, k): 1-d kernel of sample i evaluated at grid coordinate k.
  std::vector<Eigen::MatrixXd> tables(d, Eigen::MatrixXd(n, g));
  for (int j = 0; j < d; ++j) {
    const double norm = 1.0 / (h[j] * std::sqrt(2.0 * std::numbers::pi));
    for (int k = 0; k < g; ++k) {
      const double x = -1.0 + (k + 0.5) * spacing;
      tables[j].col(k) =
          norm * (-0.5 * ((x - samples.row(j).transpose().array()) / h[j]).square()).exp();
    }
  }

  // Odometer over the grid; partial[j] holds the kernel product over dims <= j.
  std::vector<Eigen::ArrayXd> partial(d);
  std::vector<int> index(d, 0);
  partial[0] = tables[0].col(0).array();
  for (int j = 1; j < d; ++j) partial[j] = partial[j - 1] * tables[j].col(0).array();

  const double cell_volume = std::pow(spacing, d);
  double sum = 0.0;
  while (true) {
    const double p = partial[d - 1].sum() / static_cast<double>(n);
    if (p > 0.0) sum -= p * std::log(p);
    int j = d - 1;
    while (j >= 0 && ++index[j] == g) index[j--] = 0;
    if (j < 0) break;
    if (j == 0) partial[0] = tables[0].col(index[0]).array();
    else partial[j] = partial[j - 1] * tables[j].col(index[j]).array();
    for (int k = j + 1; k < d; ++k) partial[k] = partial[k - 1] * tables[k].col(index[k]).array();
  }
  return sum * cell_volume;
}

double belief_entropy_kde(const BeliefEnsemble& ensemble, int grid_points_per_dim) {
  return kde_entropy(ensemble.samples, grid_points_per_dim);
}

}  // namespace cred
