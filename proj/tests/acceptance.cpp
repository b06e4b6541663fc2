// Acceptance gate: one PASS/FAIL line per primary criterion, each with its
// pinned tolerance and wall time. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "cred/belief.hpp"
#include "cred/config.hpp"
#include "cred/envdesign.hpp"
#include "cred/gp.hpp"
#include "cred/planner.hpp"
#include "cred/querygen.hpp"
#include "cred/serialization.hpp"
#include "cred/suite.hpp"
#include "oracles.hpp"

using namespace cred;

namespace {

// Pinned tolerances.
constexpr double kLikelihoodTol = 1e-12;
constexpr double kGainTol = 1e-9;
constexpr double kPlannerTol = 1e-6;
constexpr double kMcmcTol = 0.05;
constexpr double kKdeRelTol = 0.05;
constexpr double kGpInterpTol = 1e-6;
constexpr double kGpOracleTol = 1e-8;
constexpr double kBoGap = 0.05;
constexpr double kDiverseTol = 1e-12;
constexpr double kPolicyAccTarget = 0.90;

// Runtime budgets in seconds.
constexpr double kBudgetLikelihood = 1, kBudgetGain = 5, kBudgetPlanner = 30, kBudgetMcmc = 60,
                 kBudgetKde = 30, kBudgetGp = 60, kBudgetDiverse = 5, kBudgetInfoGainE2e = 600,
                 kBudgetTableE2e = 900;

const std::filesystem::path kFixtures = CRED_FIXTURE_DIR;
const std::filesystem::path kConfig = std::filesystem::path(CRED_SOURCE_DIR) / "configs" / "gridworld_10x10.json";

struct Outcome {
  bool ok = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, double budget_s, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_budget = budget_s <= 0 || secs < budget_s;
  const bool pass = o.ok && in_budget;
  if (!pass) ++failures;
  std::string budget = budget_s > 0 ? fmt::format(" (budget {:.0f}s)", budget_s) : "";
  std::printf("%s  %-28s %s [%.2fs%s]%s\n", pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs,
              budget.c_str(), in_budget ? "" : " over budget");
  std::fflush(stdout);
}

FeatureVector vec2(double a, double b) { return Eigen::Vector2d(a, b); }

Eigen::VectorXd uniform_point(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::VectorXd x(d);
  for (int j = 0; j < d; ++j) x[j] = u(rng);
  return x;
}

WeightVector random_ball(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u;
  WeightVector w(d);
  for (int j = 0; j < d; ++j) w[j] = n(rng);
  return w.normalized() * std::pow(u(rng), 1.0 / d);
}

Outcome likelihood() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    WeightVector w(3);
    FeatureVector a(3), b(3);
    for (int j = 0; j < 3; ++j) w[j] = n(rng), a[j] = n(rng), b[j] = n(rng);
    worst = std::max(worst, std::abs(preference_likelihood(w, a, b, +1) + preference_likelihood(w, a, b, -1) - 1.0));
  }
  const double hi = preference_likelihood(vec2(1, 0), vec2(50, 0), vec2(0, 0), +1);
  const double lo = preference_likelihood(vec2(1, 0), vec2(50, 0), vec2(0, 0), -1);
  const bool stable = std::isfinite(hi) && std::isfinite(lo) && lo > 0.0 && hi <= 1.0 &&
                      std::isfinite(std::log(lo));
  const double unit = preference_likelihood(vec2(1, 0), vec2(1, 0), vec2(0, 0), +1);
  const double unit_err = std::abs(unit - 1.0 / (1.0 + std::exp(-1.0)));
  return {worst <= kLikelihoodTol && stable && unit_err <= kLikelihoodTol,
          fmt::format("max|P(+1)+P(-1)-1|={:.1e} margin50 finite={} |P(1,0)-sigmoid(1)|={:.1e} tol {:.0e}",
                      worst, stable, unit_err, kLikelihoodTol)};
}

Outcome gain_oracle() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 2.0);
  double worst = 0.0;
  bool bounded = true;
  for (int k = 0; k < 100; ++k) {
    const int m = 2 + k % 7;
    BeliefEnsemble e;
    e.samples.resize(4, m);
    for (int i = 0; i < m; ++i) e.samples.col(i) = random_ball(4, rng);
    FeatureVector a(4), b(4);
    for (int j = 0; j < 4; ++j) a[j] = n(rng), b[j] = n(rng);
    std::vector<double> p;
    for (int i = 0; i < m; ++i) p.push_back(preference_likelihood(e.sample(i), a, b, +1));
    const double g = info_gain(a, b, e);
    worst = std::max(worst, std::abs(g - oracle::direct_info_gain(p)));
    bounded = bounded && g >= 0.0 && g <= 1.0;
    if (info_gain(a, a, e) != 0.0) bounded = false;
  }
  return {worst <= kGainTol && bounded,
          fmt::format("100 fixtures max|err|={:.1e} tol {:.0e}, in [0,1] and identical=0: {}", worst, kGainTol,
                      bounded)};
}

Outcome planner_oracle() {
  std::ifstream in(kFixtures / "planner_grids.json");
  const json j = json::parse(in);
  std::mt19937_64 rng(3);
  PlannerOptions opts;
  double worst = 0.0;
  int grids = 0, cases = 0;
  for (const auto& g : j.at("grids")) {
    const Environment env = environment_from_json(g);
    ++grids;
    for (int k = 0; k < 20; ++k, ++cases) {
      const WeightVector w = random_ball(env.feature_dim(), rng);
      const Policy pi = value_iteration(env, w, opts);
      worst = std::max(worst, std::abs(policy_return(env, pi, w, opts) -
                                       oracle::best_path_return(env, w, opts.goal_bonus)));
    }
  }
  return {worst <= kPlannerTol,
          fmt::format("{} grids (3x3, 4x4) x 20 weights: max|V-oracle|={:.1e} tol {:.0e}", grids, worst, kPlannerTol)};
}

Outcome mcmc_oracle() {
  auto record = [](FeatureVector a, FeatureVector b, int label) {
    return PreferenceRecord{std::move(a), std::move(b), label, "fixture", 0};
  };
  const std::vector<PreferenceRecord> records{record(vec2(2, 0), vec2(0, 0), +1),
                                              record(vec2(0, 1.5), vec2(1, 0), +1),
                                              record(vec2(1, 3), vec2(0, 0), -1)};
  const BeliefEnsemble e = adaptive_metropolis(records, 2, {20000, 2000, 5}, 5);
  const Eigen::Vector2d truth = oracle::disk_posterior_mean([&](const Eigen::Vector2d& w) {
    double l = 0.0;
    for (const auto& r : records) l += std::log(preference_likelihood(w, r.phi_a, r.phi_b, r.label));
    return l;
  });
  const Eigen::VectorXd mean = e.mean();
  const double err = (mean - truth).cwiseAbs().maxCoeff();
  bool inside = true;
  for (int i = 0; i < e.size(); ++i) inside = inside && e.sample(i).norm() <= 1.0;
  return {err <= kMcmcTol && inside && e.size() == 20000,
          fmt::format("{} samples, max coord err vs 200x200 quadrature={:.4f} tol {}, all in ball: {}", e.size(), err,
                      kMcmcTol, inside)};
}

Outcome kde_entropy_check() {
  auto cloud = [](double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma);
    Eigen::MatrixXd s(2, 5000);
    for (int i = 0; i < 5000; ++i) s.col(i) << n(rng), n(rng);
    return s;
  };
  bool ok = true;
  std::string detail;
  std::vector<double> estimates;
  for (double sigma : {0.2, 0.1, 0.05}) {
    const double closed = std::log(2.0 * std::numbers::pi * std::numbers::e * sigma * sigma);
    const double h = kde_entropy(cloud(sigma, 6), 400);
    estimates.push_back(h);
    if (sigma == 0.05) continue;  // only used for the halving check
    const double rel = std::abs(h - closed) / std::abs(closed);
    ok = ok && rel <= kKdeRelTol;
    detail += fmt::format("sigma={} rel err={:.1f}% ", sigma, 100.0 * rel);
  }
  const bool monotone = estimates[1] < estimates[0] && estimates[2] < estimates[1];
  detail += fmt::format("(tol {:.0f}%), monotone under halving: {}", 100.0 * kKdeRelTol, monotone);
  return {ok && monotone, detail};
}

Outcome gp_bo() {
  std::mt19937_64 rng(4);
  // Interpolation at noise 1e-8.
  GpHyperparams hp{1.0, Eigen::VectorXd::Constant(3, 0.4), 1e-8};
  GpModel gp(3, hp);
  for (int i = 0; i < 12; ++i) {
    const auto x = uniform_point(3, rng);
    gp.add_observation(x, std::sin(3 * x[0]) + x[1] * x[2]);
  }
  double interp = 0.0;
  for (int i = 0; i < gp.size(); ++i)
    interp = std::max(interp, std::abs(gp_posterior(gp, gp.inputs()[i]).mean - gp.outputs()[i]));

  // Dense-solve oracle at 5 random points.
  GpHyperparams hp2{1.7, Eigen::Vector4d(0.3, 0.5, 0.8, 0.25), 1e-4};
  GpModel gp2(4, hp2);
  gp2.set_prior_mean(-0.2);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 15; ++i) gp2.add_observation(uniform_point(4, rng), n01(rng));
  const auto nobs = static_cast<Eigen::Index>(gp2.size());
  Eigen::MatrixXd gram(nobs, nobs);
  Eigen::VectorXd resid(nobs);
  auto k = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return 1.7 * std::exp(-0.5 * ((a - b).array() / hp2.length_scales.array()).square().sum());
  };
  for (Eigen::Index i = 0; i < nobs; ++i) {
    for (Eigen::Index j = 0; j < nobs; ++j) gram(i, j) = k(gp2.inputs()[i], gp2.inputs()[j]) + (i == j ? 1e-4 : 0.0);
    resid[i] = gp2.outputs()[i] + 0.2;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  double oracle_err = 0.0;
  for (int t = 0; t < 5; ++t) {
    const auto x = uniform_point(4, rng);
    Eigen::VectorXd kx(nobs);
    for (Eigen::Index i = 0; i < nobs; ++i) kx[i] = k(gp2.inputs()[i], x);
    const double mean = -0.2 + kx.dot(lu.solve(resid));
    const double var = 1.7 - kx.dot(lu.solve(kx));
    const auto p = gp_posterior(gp2, x);
    oracle_err = std::max({oracle_err, std::abs(p.mean - mean), std::abs(p.stddev * p.stddev - var)});
  }

  // BO on the known-optimum quadratic stub, 4-d unit box, T = 30.
  int hits = 0;
  const Box box{Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4)};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 trng(1000 + seed);
    const Eigen::VectorXd target = uniform_point(4, trng);
    DesignOptions opts;
    opts.iterations = 30;
    const auto r = bayes_optimize(box, [&](const Eigen::VectorXd& x) -> std::optional<double> {
      return -(x - target).squaredNorm();
    }, opts, seed);
    if (r.trace[r.best].value >= -kBoGap) ++hits;
  }
  return {interp <= kGpInterpTol && oracle_err <= kGpOracleTol && hits >= 9,
          fmt::format("interp err={:.1e} (tol {:.0e}), dense-solve err={:.1e} (tol {:.0e}), BO within {} on {}/10 "
                      "seeds (need 9)",
                      interp, kGpInterpTol, oracle_err, kGpOracleTol, kBoGap, hits)};
}

Outcome diverse() {
  std::ifstream in(kFixtures / "diverse_sets.json");
  const json j = json::parse(in);
  int sets = 0, exact = 0;
  for (const auto& set : j.at("sets")) {
    std::vector<WeightVector> s;
    for (const auto& v : set.at("vectors")) s.push_back(vector_from_json(v));
    const int m = set.at("m").get<int>();
    std::optional<int> seed;
    if (set.contains("seed_index")) seed = set.at("seed_index").get<int>();
    const auto sel = select_diverse_weights(s, m, seed);
    ++sets;
    if (std::abs(min_pairwise_cosine_distance(s, sel.indices) - oracle::best_maxmin_subset(s, m)) <= kDiverseTol)
      ++exact;
  }
  return {exact == sets, fmt::format("{}/{} shipped fixtures match the exhaustive max-min optimum (tol {:.0e})",
                                     exact, sets, kDiverseTol)};
}

// One suite run of the shipped 10x10 experiment feeds both end-to-end lines;
// a second run checks byte-identical CSV.
struct SuiteRuns {
  SuiteResult first;
  double first_seconds = 0.0;
  bool identical = false;
};

SuiteRuns run_shipped_suite() {
  const ExperimentConfig config = load_config(kConfig);
  const Workspace ws = load_workspace(config);
  SuiteRuns runs;
  auto start = std::chrono::steady_clock::now();
  runs.first = run_suite(config, ws);
  runs.first_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const SuiteResult second = run_suite(config, ws);
  runs.identical = runs.first.csv == second.csv;
  const auto out = std::filesystem::path("acceptance_results");
  write_suite_outputs(runs.first, out);
  return runs;
}

double mean_gain_first_ten(const json& condition) {
  double sum = 0.0;
  int n = 0;
  for (const auto& e : condition.at("info_gain_by_iteration")) {
    const int it = e.at("iteration").get<int>();
    if (it < 1 || it > 10) continue;
    sum += e.at("info_gain").at("mean").get<double>();
    ++n;
  }
  return n ? sum / n : std::nan("");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  report("likelihood", kBudgetLikelihood, likelihood);
  report("info-gain oracle", kBudgetGain, gain_oracle);
  report("planner oracle", kBudgetPlanner, planner_oracle);
  report("mcmc oracle", kBudgetMcmc, mcmc_oracle);
  report("kde entropy", kBudgetKde, kde_entropy_check);
  report("gp/bo", kBudgetGp, gp_bo);
  report("diverse selection", kBudgetDiverse, diverse);

  SuiteRuns runs;
  std::string suite_error;
  try {
    runs = run_shipped_suite();
  } catch (const std::exception& e) {
    suite_error = e.what();
  }
  auto suite_check = [&](const std::function<Outcome(const json&)>& f) {
    return [&, f]() -> Outcome {
      if (!suite_error.empty()) return {false, "suite failed: " + suite_error};
      if (!runs.first.summary.at("errors").empty()) return {false, "suite cells failed"};
      return f(runs.first.summary.at("conditions"));
    };
  };
  // The suite runs once up front; its wall time is charged to both lines.
  auto timed = [&](double budget, const std::function<Outcome(const json&)>& f) {
    return [&, budget, f]() -> Outcome {
      Outcome o = suite_check(f)();
      if (runs.first_seconds >= budget) o.ok = false;
      o.detail += fmt::format(", suite {:.0f}s (budget {:.0f}s)", runs.first_seconds, budget);
      return o;
    };
  };

  report("e2e info gain (iters 1-10)", 0, timed(kBudgetInfoGainE2e, [](const json& c) -> Outcome {
    const double cred = mean_gain_first_ten(c.at("CRED"));
    const double rr = mean_gain_first_ten(c.at("RR"));
    const double mbp = mean_gain_first_ten(c.at("MBP"));
    return {cred >= rr && cred >= mbp,
            fmt::format("mean bits CRED={:.4f} RR={:.4f} MBP={:.4f} (need CRED >= both)", cred, rr, mbp)};
  }));

  report("e2e test-env final metrics", 0, timed(kBudgetTableE2e, [](const json& c) -> Outcome {
    auto rd = [&](const char* g) { return std::abs(c.at(g).at("test").at("reward_diff").at("mean").get<double>()); };
    const double acc = c.at("CRED").at("test").at("policy_acc").at("mean").get<double>();
    const bool directional = rd("CRED") <= rd("RR") && rd("CRED") <= rd("MBP");
    return {directional && acc >= kPolicyAccTarget,
            fmt::format("|reward diff| CRED={:.2f} RR={:.2f} MBP={:.2f} (CRED lowest: {}); CRED policy acc={:.3f} "
                        "(need >= {:.2f})",
                        rd("CRED"), rd("RR"), rd("MBP"), directional, acc, kPolicyAccTarget)};
  }));

  report("determinism", 0, [&]() -> Outcome {
    if (!suite_error.empty()) return {false, "suite failed: " + suite_error};
    return {runs.identical, fmt::format("rerun CSV byte-identical: {} ({} bytes)", runs.identical,
                                        runs.first.csv.size())};
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
