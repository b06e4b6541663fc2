#include "cred/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <spdlog/spdlog.h>

#include "cred/error.hpp"
#include "cred/random.hpp"

namespace cred {

double se_kernel(const GpHyperparams& hp, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double r2 = ((a - b).array() / hp.length_scales.array()).square().sum();
  return hp.signal_variance * std::exp(-0.5 * r2);
}

GpModel::GpModel(int dim, GpHyperparams hp) : dim_(dim), hp_(std::move(hp)) {
  if (hp_.length_scales.size() != dim) throw ShapeError("one length scale per input dimension");
}

void GpModel::set_prior_mean(double m) {
  fixed_prior_mean_ = true;
  prior_mean_ = m;
  refactor();
}

void GpModel::add_observation(const Eigen::VectorXd& x, double y) {
  if (x.size() != dim_) throw ShapeError("GP input has the wrong dimension");
  xs_.push_back(x);
  ys_.push_back(y);
  refactor();
}

void GpModel::set_hyperparams(GpHyperparams hp) {
  if (hp.length_scales.size() != dim_) throw ShapeError("one length scale per input dimension");
  hp_ = std::move(hp);
  refactor();
}

void GpModel::refactor() {
  const auto n = static_cast<Eigen::Index>(ys_.size());
  if (!fixed_prior_mean_) {
    prior_mean_ = 0.0;
    for (double y : ys_) prior_mean_ += y;
    if (n > 0) prior_mean_ /= static_cast<double>(n);
  }
  if (n == 0) {
    chol_.resize(0, 0);
    alpha_.resize(0);
    jitter_ = 0.0;
    return;
  }
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = se_kernel(hp_, xs_[i], xs_[j]);

  jitter_ = 0.0;
  for (;;) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += hp_.noise_variance + jitter_;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      chol_ = llt.matrixL();
      break;
    }
    jitter_ = jitter_ == 0.0 ? 1e-10 : jitter_ * 10.0;
    if (jitter_ > kMaxJitter * (1.0 + 1e-9))
      throw NumericalError("GP kernel matrix is not positive definite even with jitter 1e-4");
  }
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) resid[i] = ys_[i] - prior_mean_;
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(
      chol_.triangularView<Eigen::Lower>().solve(resid));
}

GpPrediction GpModel::predict(const Eigen::VectorXd& x) const {
  if (x.size() != dim_) throw ShapeError("GP input has the wrong dimension");
  const auto n = static_cast<Eigen::Index>(ys_.size());
  if (n == 0) return {prior_mean_, std::sqrt(hp_.signal_variance)};
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = se_kernel(hp_, xs_[i], x);
  const double mean = prior_mean_ + ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  const double var = std::max(0.0, hp_.signal_variance - v.squaredNorm());
  return {mean, std::sqrt(var)};
}

double GpModel::log_marginal_likelihood() const {
  const auto n = static_cast<Eigen::Index>(ys_.size());
  if (n == 0) return 0.0;
  Eigen::VectorXd resid(n);
  for (Eigen::Index i = 0; i < n; ++i) resid[i] = ys_[i] - prior_mean_;
  return -0.5 * resid.dot(alpha_) - chol_.diagonal().array().log().sum() -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GpPrediction gp_posterior(const GpModel& model, const Eigen::VectorXd& theta) {
  return model.predict(theta);
}

namespace {

struct Objective {
  const GpModel& base;
  double noise;

  GpHyperparams unpack(const Eigen::VectorXd& p) const {
    GpHyperparams hp;
    hp.signal_variance = std::exp(p[0]);
    hp.length_scales = p.tail(p.size() - 1).array().exp();
    hp.noise_variance = noise;
    return hp;
  }

  double operator()(const Eigen::VectorXd& p) const {
    GpModel m = base;
    try {
      m.set_hyperparams(unpack(p));
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
    const double v = m.log_marginal_likelihood();
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  }
};

}  // namespace

GpModel gp_fit_hyperparams(const GpModel& model, const Eigen::VectorXd& box_width,
                           const GpFitOptions& opts, std::uint64_t seed) {
  if (model.size() < 3) throw ConfigError("hyperparameter fitting needs at least 3 observations");
  const int d = model.dim();
  if (box_width.size() != d) throw ShapeError("box width must match the GP input dimension");

  double var_y = 0.0;
  {
    const auto& ys = model.outputs();
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    for (double y : ys) var_y += (y - mean) * (y - mean);
    var_y /= static_cast<double>(ys.size());
  }

  Eigen::VectorXd lo(d + 1), hi(d + 1);
  lo[0] = std::log(opts.variance_floor);
  hi[0] = std::log(std::max(opts.variance_floor, 100.0 * var_y));
  for (int j = 0; j < d; ++j) {
    lo[j + 1] = std::log(opts.min_scale * box_width[j]);
    hi[j + 1] = std::log(opts.max_scale * box_width[j]);
  }
  const Objective objective{model, std::max(model.hyperparams().noise_variance, opts.noise_floor)};
  auto clamp = [&](Eigen::VectorXd p) { return p.cwiseMax(lo).cwiseMin(hi); };

  std::vector<Eigen::VectorXd> starts;
  Eigen::VectorXd current(d + 1);
  current[0] = std::log(model.hyperparams().signal_variance);
  current.tail(d) = model.hyperparams().length_scales.array().log();
  starts.push_back(clamp(current));
  Eigen::VectorXd typical(d + 1);
  typical[0] = std::log(std::max(opts.variance_floor, var_y));
  typical.tail(d) = (0.3 * box_width).array().log();
  starts.push_back(clamp(typical));
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd p(d + 1);
    for (int j = 0; j <= d; ++j) p[j] = lo[j] + unit(rng) * (hi[j] - lo[j]);
    starts.push_back(p);
  }

  Eigen::VectorXd best_p = current;
  double best_v = objective(current);
  const double previous = model.log_marginal_likelihood();
  for (const Eigen::VectorXd& start : starts) {
    Eigen::VectorXd p = start;
    double v = objective(p);
    for (double step = 1.0; step >= 0.05; step *= 0.5) {
      for (int pass = 0; pass < 20; ++pass) {
        bool improved = false;
        for (int j = 0; j <= d; ++j)
          for (double dir : {+1.0, -1.0}) {
            Eigen::VectorXd trial = p;
            trial[j] = std::clamp(trial[j] + dir * step, lo[j], hi[j]);
            if (trial[j] == p[j]) continue;
            const double tv = objective(trial);
            if (tv > v) {
              p = trial;
              v = tv;
              improved = true;
            }
          }
        if (!improved) break;
      }
    }
    if (v > best_v) {
      best_v = v;
      best_p = p;
    }
  }

  GpModel fitted = model;
  if (!std::isfinite(best_v) || best_v < previous) {
    spdlog::warn("GP hyperparameter fit did not improve the marginal likelihood; keeping previous");
    return fitted;
  }
  fitted.set_hyperparams(objective.unpack(best_p));
  return fitted;
}

}  // namespace cred
