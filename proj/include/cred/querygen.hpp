#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cred/belief.hpp"
#include "cred/env.hpp"
#include "cred/planner.hpp"
#include "cred/random.hpp"

namespace cred {

enum class Generator { kCR, kRR, kMBP, kCRED, kMBPED };

const char* generator_name(Generator g);
Generator generator_from_name(const std::string& name);

/// A trajectory pair posed to the human, with its environment.
struct PreferenceQuery {
  Trajectory a;
  Trajectory b;
  std::shared_ptr<const Environment> env;
  double info_gain = 0.0;  // bits
  Generator generator = Generator::kCR;

  const std::string& env_id() const { return env->id(); }
};

struct QueryOptions {
  int n_weights = 100;   // N: weights drawn from the belief
  int n_diverse = 8;     // M: diverse subset that gets a policy each
  int n_rollouts = 100;  // K: candidate rollouts for RR and MBP
  double epsilon = 0.25; // MBP random-action probability
};

/// Mutual information (bits) between the answer to (A, B) and w over an
/// equally weighted ensemble. Features are the normalized ones.
double info_gain(const FeatureVector& phi_a, const FeatureVector& phi_b,
                 const BeliefEnsemble& ensemble);

/// Same for trajectories of one environment.
double info_gain(const Environment& env, const Trajectory& a, const Trajectory& b,
                 const BeliefEnsemble& ensemble);

/// Info gain from per-sample likelihoods P(+1 | w_m).
double info_gain_from_probabilities(const Eigen::Ref<const Eigen::ArrayXd>& p_plus);

struct PairChoice {
  int i = 0;
  int j = 1;
  double gain = 0.0;
};

/// Argmax of info gain over all pairs i < j (lowest pair index wins ties).
/// `features` holds normalized feature vectors, one per column.
PairChoice best_pair(const Eigen::MatrixXd& features, const BeliefEnsemble& ensemble);

struct DiverseSelection {
  std::vector<int> indices;   // into the input samples, in selection order
  std::vector<int> excluded;  // zero-norm samples that were skipped
};

/// Greedy max-min cosine-distance subset of size M. Starts from the sample
/// closest in direction to the mean (or `seed_index` when given), then adds
/// the candidate with the largest minimum distance to the chosen set.
DiverseSelection select_diverse_weights(const std::vector<WeightVector>& samples, int m,
                                        std::optional<int> seed_index = std::nullopt);

double cosine_distance(const WeightVector& a, const WeightVector& b);

/// Smallest pairwise cosine distance within a subset.
double min_pairwise_cosine_distance(const std::vector<WeightVector>& samples,
                                    const std::vector<int>& subset);

/// Counterfactual reasoning: bootstrap N weights from the belief, keep M
/// diverse ones, plan and roll out (epsilon = 0) for each, and return the
/// most informative distinct pair. std::nullopt signals a degenerate query
/// (fewer than two distinct trajectories).
std::optional<PreferenceQuery> counterfactual_query(std::shared_ptr<const Environment> env,
                                                    const BeliefEnsemble& ensemble,
                                                    const QueryOptions& opts,
                                                    PolicySolver& solver, Rng& rng);

/// Random-rollout baseline: K uniform random walks, best pair by gain.
PreferenceQuery random_rollout_query(std::shared_ptr<const Environment> env,
                                     const BeliefEnsemble& ensemble, const QueryOptions& opts,
                                     Rng& rng);

/// Mean-belief-policy baseline: one policy on the mean weight, K
/// epsilon-greedy rollouts, best pair by gain.
PreferenceQuery mean_belief_query(std::shared_ptr<const Environment> env,
                                  const BeliefEnsemble& ensemble, const QueryOptions& opts,
                                  PolicySolver& solver, Rng& rng);

}  // namespace cred
