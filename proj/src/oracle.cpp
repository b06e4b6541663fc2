#include "cred/oracle.hpp"

#include <cmath>
#include <limits>

#include "cred/belief.hpp"
#include "cred/error.hpp"

namespace cred {

const char* response_mode_name(ResponseMode m) {
  return m == ResponseMode::kExact ? "exact" : "boltzmann";
}

ResponseMode response_mode_from_name(const std::string& name) {
  if (name == "exact") return ResponseMode::kExact;
  if (name == "boltzmann") return ResponseMode::kBoltzmann;
  throw ConfigError("unknown oracle mode '" + name + "'");
}

int simulated_preference(const SimulatedUser& user, const FeatureVector& phi_a,
                         const FeatureVector& phi_b, std::uint64_t query_index) {
  const FeatureVector psi = feature_difference(phi_a, phi_b);
  if (psi.size() != user.w_true.size()) throw ShapeError("user weights and features differ in dimension");
  const double margin = user.w_true.dot(psi);
  if (user.mode == ResponseMode::kExact) return margin >= 0.0 ? +1 : -1;
  Rng rng(derive_seed(user.seed, {0x6f7261636c65ULL, query_index}));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < sigmoid(margin) ? +1 : -1;
}

Eigen::MatrixXd sample_unit_sphere(int n, int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd pts(dim, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v(dim);
    do {
      for (int j = 0; j < dim; ++j) v[j] = normal(rng);
    } while (v.norm() < 1e-12);
    pts.col(i) = v.normalized();
  }
  return pts;
}

namespace {

// k-means++ seeding.
Eigen::MatrixXd seed_centers(const Eigen::MatrixXd& points, int k, Rng& rng) {
  const auto n = points.cols();
  Eigen::MatrixXd centers(points.rows(), k);
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.col(0) = points.col(first(rng));
  Eigen::VectorXd d2 = (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = unit(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        u -= d2[pick];
        if (u <= 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.col(c) = points.col(pick);
    d2 = d2.cwiseMin((points.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, double tol, Rng& rng) {
  const auto n = points.cols();
  if (k < 1 || k > n) throw ConfigError("k-means needs 1 <= k <= number of points");
  KMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  const int max_attempts = 10 * std::max(restarts, 1);
  int completed = 0;
  for (int attempt = 0; attempt < max_attempts && completed < restarts; ++attempt) {
    Eigen::MatrixXd centers = seed_centers(points, k, rng);
    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    std::vector<double> trace;
    bool empty_cluster = false;
    double previous = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 1000; ++iter) {
      double objective = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index arg = 0;
        const double dist = (centers.colwise() - points.col(i)).colwise().squaredNorm().minCoeff(&arg);
        assign[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        objective += dist;
      }
      trace.push_back(objective);
      Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(points.rows(), k);
      std::vector<int> counts(static_cast<std::size_t>(k), 0);
      for (Eigen::Index i = 0; i < n; ++i) {
        sums.col(assign[static_cast<std::size_t>(i)]) += points.col(i);
        ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] == 0) {
          empty_cluster = true;
          break;
        }
        centers.col(c) = sums.col(c) / counts[static_cast<std::size_t>(c)];
      }
      if (empty_cluster) break;
      if (previous - objective <= tol * std::max(1.0, objective)) break;
      previous = objective;
    }
    if (empty_cluster) continue;
    ++completed;
    // Objective after the final center update.
    double objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      objective += (centers.col(assign[static_cast<std::size_t>(i)]) - points.col(i)).squaredNorm();
    trace.push_back(objective);
    if (objective < best.objective) {
      best.centers = centers;
      best.assignment = assign;
      best.objective = objective;
      best.objective_trace = trace;
    }
  }
  if (completed == 0) throw NumericalError("k-means produced empty clusters on every restart");
  best.restarts_used = completed;
  return best;
}

std::vector<WeightVector> ground_truth_weights(int n_users, int n_pool, int dim,
                                               std::uint64_t seed) {
  if (n_users < 1 || n_users > n_pool) throw ConfigError("ground truth needs 1 <= n_users <= n_pool");
  Rng rng(derive_seed(seed, {0x6774ULL}));
  const Eigen::MatrixXd pool = sample_unit_sphere(n_pool, dim, rng);
  const KMeansResult km = kmeans(pool, n_users, 20, 1e-6, rng);
  std::vector<WeightVector> users;
  for (int c = 0; c < n_users; ++c) {
    WeightVector w = km.centers.col(c);
    if (w.norm() < 1e-12) throw NumericalError("k-means center at the origin cannot be renormalized");
    users.push_back(w.normalized());
  }
  return users;
}

}  // namespace cred
