#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "cred/env.hpp"
#include "cred/random.hpp"

namespace cred {

enum class ResponseMode { kBoltzmann, kExact };

const char* response_mode_name(ResponseMode m);
ResponseMode response_mode_from_name(const std::string& name);

/// A simulated human with hidden reward weights.
struct SimulatedUser {
  WeightVector w_true;
  ResponseMode mode = ResponseMode::kBoltzmann;
  std::uint64_t seed = 0;
};

/// +1 if A is preferred, -1 otherwise. Features are the normalized ones.
/// Exact mode answers sign(w . psi) with ties to +1; Boltzmann mode samples
/// the label from the preference likelihood, seeded by (seed, query_index).
int simulated_preference(const SimulatedUser& user, const FeatureVector& phi_a,
                         const FeatureVector& phi_b, std::uint64_t query_index);

struct KMeansResult {
  Eigen::MatrixXd centers;              // one center per column
  std::vector<int> assignment;
  double objective = 0.0;               // sum of squared distances
  std::vector<double> objective_trace;  // per Lloyd iteration, best restart
  int restarts_used = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Each restart that produces an
/// empty cluster is re-initialized. Returns the restart with the lowest
/// objective.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, int restarts, double tol, Rng& rng);

/// Points drawn uniformly on the unit sphere in `dim` dimensions (columns).
Eigen::MatrixXd sample_unit_sphere(int n, int dim, Rng& rng);

/// Diverse ground-truth weights: K-Means centers of `n_pool` sphere samples,
/// projected back onto the unit sphere.
std::vector<WeightVector> ground_truth_weights(int n_users, int n_pool, int dim,
                                               std::uint64_t seed);

}  // namespace cred
