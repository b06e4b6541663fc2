#include "cred/querygen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "cred/error.hpp"

namespace cred {

const char* generator_name(Generator g) {
  switch (g) {
    case Generator::kCR: return "CR";
    case Generator::kRR: return "RR";
    case Generator::kMBP: return "MBP";
    case Generator::kCRED: return "CRED";
    case Generator::kMBPED: return "MBP+ED";
  }
  return "?";
}

Generator generator_from_name(const std::string& name) {
  if (name == "CR") return Generator::kCR;
  if (name == "RR") return Generator::kRR;
  if (name == "MBP") return Generator::kMBP;
  if (name == "CRED") return Generator::kCRED;
  if (name == "MBP+ED" || name == "MBPED") return Generator::kMBPED;
  throw ConfigError("unknown condition '" + name + "'");
}

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Margins z_m = w_m . (Phi_A - Phi_B). P(+1 | w_m) = sigmoid(z_m).
double gain_from_margins(const Eigen::Ref<const Eigen::ArrayXd>& margins) {
  const auto m = margins.size();
  double self = 0.0, s_plus = 0.0, s_minus = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double p = sigmoid(margins[k]);
    const double q = sigmoid(-margins[k]);
    self += xlog2x(p) + xlog2x(q);
    s_plus += p;
    s_minus += q;
  }
  const double mm = static_cast<double>(m);
  const double gain = std::log2(mm) + self / mm - (xlog2x(s_plus) + xlog2x(s_minus)) / mm;
  return std::clamp(gain, 0.0, 1.0);
}

}  // namespace

double info_gain_from_probabilities(const Eigen::Ref<const Eigen::ArrayXd>& p_plus) {
  const auto m = p_plus.size();
  if (m == 0) throw ShapeError("info gain over an empty ensemble");
  double self = 0.0, s_plus = 0.0, s_minus = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double p = p_plus[k];
    const double q = 1.0 - p;
    self += xlog2x(p) + xlog2x(q);
    s_plus += p;
    s_minus += q;
  }
  const double mm = static_cast<double>(m);
  const double gain = std::log2(mm) + self / mm - (xlog2x(s_plus) + xlog2x(s_minus)) / mm;
  return std::clamp(gain, 0.0, 1.0);
}

double info_gain(const FeatureVector& phi_a, const FeatureVector& phi_b,
                 const BeliefEnsemble& ensemble) {
  if (ensemble.size() == 0) throw ShapeError("info gain over an empty ensemble");
  const FeatureVector psi = feature_difference(phi_a, phi_b);
  if (psi.size() != ensemble.dim()) throw ShapeError("feature and belief dimensions differ");
  const Eigen::ArrayXd margins = (ensemble.samples.transpose() * psi).array();
  return gain_from_margins(margins);
}

double info_gain(const Environment& env, const Trajectory& a, const Trajectory& b,
                 const BeliefEnsemble& ensemble) {
  if (a.env_id != b.env_id) throw InvalidTrajectoryError("trajectories belong to different environments");
  return info_gain(preference_features(env, a), preference_features(env, b), ensemble);
}

PairChoice best_pair(const Eigen::MatrixXd& features, const BeliefEnsemble& ensemble) {
  if (ensemble.size() == 0) throw ShapeError("info gain over an empty ensemble");
  const auto k = static_cast<int>(features.cols());
  if (k < 2) throw ShapeError("need at least two candidate trajectories");

  // Identical candidates score 0 against each other; evaluate each distinct
  // column once, represented by its first occurrence.
  std::vector<int> unique;
  for (int c = 0; c < k; ++c) {
    bool seen = false;
    for (int u : unique)
      if (features.col(u) == features.col(c)) {
        seen = true;
        break;
      }
    if (!seen) unique.push_back(c);
  }

  PairChoice best{0, 1, 0.0};
  if (unique.size() < 2) return best;
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(unique.size()), ensemble.size());
  for (std::size_t u = 0; u < unique.size(); ++u)
    scores.row(static_cast<Eigen::Index>(u)) =
        features.col(unique[u]).transpose() * ensemble.samples;

  bool have = false;
  Eigen::ArrayXd margins(ensemble.size());
  for (std::size_t a = 0; a < unique.size(); ++a)
    for (std::size_t b = a + 1; b < unique.size(); ++b) {
      margins = (scores.row(static_cast<Eigen::Index>(a)) - scores.row(static_cast<Eigen::Index>(b)))
                    .transpose()
                    .array();
      const double g = gain_from_margins(margins);
      const int i = unique[a], j = unique[b];
      const bool better = !have || g > best.gain ||
                          (g == best.gain && (i < best.i || (i == best.i && j < best.j)));
      if (better) {
        best = PairChoice{i, j, g};
        have = true;
      }
    }
  return best;
}

double cosine_distance(const WeightVector& a, const WeightVector& b) {
  return 1.0 - a.dot(b) / (a.norm() * b.norm());
}

double min_pairwise_cosine_distance(const std::vector<WeightVector>& samples,
                                    const std::vector<int>& subset) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < subset.size(); ++i)
    for (std::size_t j = i + 1; j < subset.size(); ++j)
      best = std::min(best, cosine_distance(samples[subset[i]], samples[subset[j]]));
  return best;
}

DiverseSelection select_diverse_weights(const std::vector<WeightVector>& samples, int m,
                                        std::optional<int> seed_index) {
  DiverseSelection out;
  std::vector<int> valid;
  for (int i = 0; i < static_cast<int>(samples.size()); ++i) {
    if (samples[i].norm() < 1e-12) {
      out.excluded.push_back(i);
      continue;
    }
    valid.push_back(i);
  }
  if (!out.excluded.empty())
    spdlog::warn("diverse selection skipped {} zero-norm weight sample(s)", out.excluded.size());
  if (valid.empty() || m <= 0) return out;

  int seed = valid.front();
  if (seed_index) {
    seed = *seed_index;
    if (std::find(valid.begin(), valid.end(), seed) == valid.end())
      throw ShapeError("seed index is not a valid nonzero sample");
  } else {
    WeightVector mean = WeightVector::Zero(samples[valid.front()].size());
    for (int i : valid) mean += samples[i];
    if (mean.norm() > 1e-12) {
      double best = -std::numeric_limits<double>::infinity();
      for (int i : valid) {
        const double c = samples[i].dot(mean) / samples[i].norm();
        if (c > best) {
          best = c;
          seed = i;
        }
      }
    }
  }

  const int target = std::min<int>(m, static_cast<int>(valid.size()));
  std::vector<double> min_dist(samples.size(), std::numeric_limits<double>::infinity());
  std::vector<char> chosen(samples.size(), 0);
  int next = seed;
  while (static_cast<int>(out.indices.size()) < target) {
    out.indices.push_back(next);
    chosen[next] = 1;
    for (int i : valid)
      if (!chosen[i]) min_dist[i] = std::min(min_dist[i], cosine_distance(samples[i], samples[next]));
    double best = -std::numeric_limits<double>::infinity();
    next = -1;
    for (int i : valid)
      if (!chosen[i] && min_dist[i] > best) {
        best = min_dist[i];
        next = i;
      }
    if (next < 0) break;
  }
  return out;
}

namespace {

PreferenceQuery pick_query(std::shared_ptr<const Environment> env,
                           std::vector<Trajectory> candidates, const BeliefEnsemble& ensemble,
                           Generator tag) {
  Eigen::MatrixXd features(env->feature_dim(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c)
    features.col(static_cast<Eigen::Index>(c)) = preference_features(*env, candidates[c]);
  const PairChoice pair = best_pair(features, ensemble);
  PreferenceQuery q;
  q.a = std::move(candidates[pair.i]);
  q.b = std::move(candidates[pair.j]);
  q.env = std::move(env);
  q.info_gain = pair.gain;
  q.generator = tag;
  return q;
}

}  // namespace

std::optional<PreferenceQuery> counterfactual_query(std::shared_ptr<const Environment> env,
                                                    const BeliefEnsemble& ensemble,
                                                    const QueryOptions& opts,
                                                    PolicySolver& solver, Rng& rng) {
  if (ensemble.size() == 0) throw ShapeError("counterfactual query needs a non-empty belief");
  if (opts.n_diverse < 2 || opts.n_weights < opts.n_diverse)
    throw ConfigError("counterfactual query needs N >= M >= 2");

  std::uniform_int_distribution<int> pick(0, ensemble.size() - 1);
  std::vector<WeightVector> drawn;
  drawn.reserve(static_cast<std::size_t>(opts.n_weights));
  for (int i = 0; i < opts.n_weights; ++i) drawn.push_back(ensemble.sample(pick(rng)));

  const DiverseSelection diverse = select_diverse_weights(drawn, opts.n_diverse);
  std::vector<Trajectory> candidates;
  for (int idx : diverse.indices) {
    const auto policy = solver.solve(*env, drawn[idx]);
    Trajectory t = greedy_rollout(*env, *policy);
    const bool duplicate = std::any_of(candidates.begin(), candidates.end(),
                                       [&](const Trajectory& c) { return c.features == t.features; });
    if (!duplicate) candidates.push_back(std::move(t));
  }
  if (candidates.size() < 2) return std::nullopt;
  return pick_query(std::move(env), std::move(candidates), ensemble, Generator::kCR);
}

PreferenceQuery random_rollout_query(std::shared_ptr<const Environment> env,
                                     const BeliefEnsemble& ensemble, const QueryOptions& opts,
                                     Rng& rng) {
  if (opts.n_rollouts < 2) throw ConfigError("random-rollout query needs K >= 2");
  std::vector<Trajectory> candidates;
  candidates.reserve(static_cast<std::size_t>(opts.n_rollouts));
  for (int k = 0; k < opts.n_rollouts; ++k) candidates.push_back(random_walk(*env, env->horizon(), rng));
  return pick_query(std::move(env), std::move(candidates), ensemble, Generator::kRR);
}

PreferenceQuery mean_belief_query(std::shared_ptr<const Environment> env,
                                  const BeliefEnsemble& ensemble, const QueryOptions& opts,
                                  PolicySolver& solver, Rng& rng) {
  if (opts.n_rollouts < 2) throw ConfigError("mean-belief query needs K >= 2");
  if (!(opts.epsilon >= 0.0 && opts.epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0,1]");
  WeightVector mean = ensemble.mean();
  if (mean.norm() > 1.0) mean.normalize();
  const auto policy = solver.solve(*env, mean);
  std::vector<Trajectory> candidates;
  candidates.reserve(static_cast<std::size_t>(opts.n_rollouts));
  for (int k = 0; k < opts.n_rollouts; ++k)
    candidates.push_back(rollout(*env, *policy, opts.epsilon, env->horizon(), rng));
  return pick_query(std::move(env), std::move(candidates), ensemble, Generator::kMBP);
}

}  // namespace cred
