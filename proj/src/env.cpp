#include "cred/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "cred/error.hpp"
#include "cred/random.hpp"
#include "cred/serialization.hpp"

namespace cred {

namespace {

constexpr int kRowStep[kNumMoves] = {0, 1, 0, -1};
constexpr int kColStep[kNumMoves] = {1, 0, -1, 0};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

const char* terrain_name(Terrain t) {
  switch (t) {
    case Terrain::kBrick: return "brick";
    case Terrain::kGravel: return "gravel";
    case Terrain::kSand: return "sand";
    case Terrain::kGrass: return "grass";
  }
  return "unknown";
}

int Environment::default_horizon(const TerrainGrid& grid) { return 4 * grid.size; }
int Environment::default_horizon(const StreetGraph& graph) {
  return 3 * static_cast<int>(graph.nodes.size());
}

Environment Environment::from_grid(TerrainGrid grid, double gamma, std::optional<int> horizon) {
  if (grid.size < 2) throw InvariantError("grid size must be at least 2");
  if (grid.terrain.size() != static_cast<std::size_t>(grid.size * grid.size))
    throw InvariantError("terrain must hold exactly size*size cells");
  for (auto t : grid.terrain)
    if (t >= kNumTerrains) throw InvariantError("terrain id out of range");
  auto inside = [&](GridCell c) {
    return c.row >= 0 && c.col >= 0 && c.row < grid.size && c.col < grid.size;
  };
  if (!inside(grid.start)) throw InvariantError("start cell outside grid");
  if (!inside(grid.goal)) throw InvariantError("goal cell outside grid");
  if (grid.start == grid.goal) throw InvariantError("start must differ from goal");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvariantError("discount must lie in [0,1)");

  Environment env;
  env.horizon_ = horizon.value_or(default_horizon(grid));
  if (env.horizon_ < 1) throw InvariantError("horizon must be positive");
  env.world_ = std::move(grid);
  env.gamma_ = gamma;
  env.feature_dim_ = kNumTerrains;
  env.build_grid();
  env.finish();
  return env;
}

Environment Environment::from_graph(StreetGraph graph, double gamma, std::optional<int> horizon) {
  if (graph.nodes.empty()) throw InvariantError("graph has no nodes");
  std::unordered_map<std::int64_t, int> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i)
    if (!index.emplace(graph.nodes[i], static_cast<int>(i)).second)
      throw InvariantError("duplicate node id " + std::to_string(graph.nodes[i]));
  for (const auto& e : graph.edges) {
    if (!index.contains(e.src) || !index.contains(e.dst))
      throw InvariantError("edge endpoint does not exist");
    if (!(e.distance > 0.0)) throw InvariantError("edge distance must be positive");
    if (!(e.travel_time > 0.0)) throw InvariantError("edge travel_time must be positive");
    if (!std::isfinite(e.elevation_delta)) throw InvariantError("edge elevation must be finite");
  }
  if (!index.contains(graph.start)) throw InvariantError("start node does not exist");
  if (!index.contains(graph.goal)) throw InvariantError("goal node does not exist");
  if (graph.start == graph.goal) throw InvariantError("start must differ from goal");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvariantError("discount must lie in [0,1)");

  Environment env;
  env.horizon_ = horizon.value_or(default_horizon(graph));
  if (env.horizon_ < 1) throw InvariantError("horizon must be positive");
  env.world_ = std::move(graph);
  env.gamma_ = gamma;
  env.feature_dim_ = kStreetFeatures;
  env.build_graph();
  env.finish();
  return env;
}

const TerrainGrid& Environment::grid() const {
  if (!is_grid()) throw InvariantError("environment is not a grid");
  return std::get<TerrainGrid>(world_);
}

const StreetGraph& Environment::graph() const {
  if (is_grid()) throw InvariantError("environment is not a street graph");
  return std::get<StreetGraph>(world_);
}

void Environment::build_grid() {
  const auto& g = std::get<TerrainGrid>(world_);
  const int n = g.size * g.size;
  start_state_ = g.cell_index(g.start);
  goal_state_ = g.cell_index(g.goal);
  arc_offset_.assign(1, 0);
  arcs_.clear();
  for (int s = 0; s < n; ++s) {
    if (s != goal_state_) {
      const GridCell c = g.cell_at(s);
      for (int m = 0; m < kNumMoves; ++m) {
        const GridCell nc{c.row + kRowStep[m], c.col + kColStep[m]};
        if (nc.row < 0 || nc.col < 0 || nc.row >= g.size || nc.col >= g.size) continue;
        arcs_.push_back(Arc{m, g.cell_index(nc), -1, false});
      }
    }
    arc_offset_.push_back(static_cast<int>(arcs_.size()));
  }
  arc_features_ = Eigen::MatrixXd::Zero(kNumTerrains, static_cast<Eigen::Index>(arcs_.size()));
  for (std::size_t k = 0; k < arcs_.size(); ++k)
    arc_features_(g.terrain[arcs_[k].next], static_cast<Eigen::Index>(k)) = 1.0;
}

void Environment::build_graph() {
  const auto& g = std::get<StreetGraph>(world_);
  std::unordered_map<std::int64_t, int> index;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) index[g.nodes[i]] = static_cast<int>(i);
  const int n = static_cast<int>(g.nodes.size());
  start_state_ = index.at(g.start);
  goal_state_ = index.at(g.goal);

  std::vector<std::vector<Arc>> out(n);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const int u = index.at(g.edges[e].src);
    const int v = index.at(g.edges[e].dst);
    out[u].push_back(Arc{0, v, static_cast<int>(e), false});
    if (!g.directed) out[v].push_back(Arc{0, u, static_cast<int>(e), true});
  }
  arc_offset_.assign(1, 0);
  arcs_.clear();
  for (int s = 0; s < n; ++s) {
    if (s != goal_state_) {
      int a = 0;
      for (Arc arc : out[s]) {
        arc.action = a++;
        arcs_.push_back(arc);
      }
    }
    arc_offset_.push_back(static_cast<int>(arcs_.size()));
  }
  arc_features_.resize(kStreetFeatures, static_cast<Eigen::Index>(arcs_.size()));
  for (std::size_t k = 0; k < arcs_.size(); ++k) {
    const auto& e = g.edges[arcs_[k].edge];
    const auto col = static_cast<Eigen::Index>(k);
    arc_features_(0, col) = e.distance;
    arc_features_(1, col) = e.travel_time;
    arc_features_(2, col) = arcs_[k].reversed ? -e.elevation_delta : e.elevation_delta;
  }
}

void Environment::finish() {
  // Reverse BFS from the goal.
  const int n = num_states();
  std::vector<std::vector<int>> pred(n);
  for (int s = 0; s < n; ++s)
    for (const Arc& a : arcs(s)) pred[a.next].push_back(s);
  reaches_goal_.assign(n, 0);
  std::queue<int> frontier;
  reaches_goal_[goal_state_] = 1;
  frontier.push(goal_state_);
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop();
    for (int p : pred[s])
      if (!reaches_goal_[p]) {
        reaches_goal_[p] = 1;
        frontier.push(p);
      }
  }
  if (!reaches_goal_[start_state_]) throw InvariantError("unreachable goal: no path from start to goal");

  std::ostringstream key;
  key << environment_to_json(*this).dump();
  std::ostringstream hex;
  hex << std::hex << fnv1a(key.str());
  id_ = (is_grid() ? "grid-" : "graph-") + hex.str();
}

std::span<const Arc> Environment::arcs(int state) const {
  if (state < 0 || state >= num_states())
    throw InvalidActionError("state " + std::to_string(state) + " does not exist");
  return std::span<const Arc>(arcs_).subspan(arc_offset_[state],
                                             arc_offset_[state + 1] - arc_offset_[state]);
}

const Arc& Environment::arc(int state, int action) const {
  for (const Arc& a : arcs(state))
    if (a.action == action) return a;
  throw InvalidActionError("action " + std::to_string(action) + " is illegal at state " +
                           state_label(state));
}

FeatureVector Environment::step_features(int state, int action) const {
  const Arc& a = arc(state, action);
  const auto k = static_cast<Eigen::Index>(&a - arcs_.data());
  return arc_features_.col(k);
}

std::string Environment::state_label(int state) const {
  if (is_grid()) {
    const GridCell c = grid().cell_at(state);
    return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
  }
  return "node " + std::to_string(graph().nodes.at(state));
}

bool Environment::operator==(const Environment& other) const {
  return world_ == other.world_ && gamma_ == other.gamma_ && horizon_ == other.horizon_;
}

std::vector<int> Trajectory::states() const {
  std::vector<int> out;
  out.reserve(steps.size() + 1);
  for (const Step& s : steps) out.push_back(s.state);
  out.push_back(final_state);
  return out;
}

FeatureVector trajectory_features(const Environment& env, const Trajectory& traj) {
  FeatureVector phi = FeatureVector::Zero(env.feature_dim());
  int state = env.start_state();
  for (std::size_t t = 0; t < traj.steps.size(); ++t) {
    const Step& step = traj.steps[t];
    if (step.state != state)
      throw InvalidTrajectoryError("trajectory disconnected at step " + std::to_string(t));
    try {
      phi += env.step_features(step.state, step.action);
      state = env.next_state(step.state, step.action);
    } catch (const InvalidActionError& e) {
      throw InvalidTrajectoryError(std::string("illegal step: ") + e.what());
    }
  }
  if (state != traj.final_state)
    throw InvalidTrajectoryError("final state does not follow from the last step");
  return phi;
}

Trajectory make_trajectory(const Environment& env, std::vector<Step> steps) {
  Trajectory traj;
  traj.env_id = env.id();
  traj.steps = std::move(steps);
  traj.final_state = traj.steps.empty()
                         ? env.start_state()
                         : env.next_state(traj.steps.back().state, traj.steps.back().action);
  traj.features = trajectory_features(env, traj);
  return traj;
}

FeatureVector preference_features(const Environment& env, const Trajectory& traj) {
  return traj.features / static_cast<double>(env.horizon());
}

// ---------------------------------------------------------------------------

bool Box::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

Eigen::VectorXd Box::clip(Eigen::VectorXd x) const {
  return x.cwiseMax(lower).cwiseMin(upper);
}

ParamDomain param_domain_for(const Environment& env) {
  return env.is_grid() ? ParamDomain::kGridPatch : ParamDomain::kGraphEdges;
}

Box param_bounds(const Environment& env_template, const EdgeFeatureRanges& ranges) {
  Box box;
  if (env_template.is_grid()) {
    box.lower = Eigen::VectorXd::Zero(kGridPatchParams);
    box.upper = Eigen::VectorXd::Ones(kGridPatchParams);
    return box;
  }
  const auto m = static_cast<Eigen::Index>(env_template.graph().edges.size());
  box.lower.resize(3 * m);
  box.upper.resize(3 * m);
  for (Eigen::Index e = 0; e < m; ++e) {
    box.lower.segment<3>(3 * e) << ranges.distance_lo, ranges.time_lo, ranges.elevation_lo;
    box.upper.segment<3>(3 * e) << ranges.distance_hi, ranges.time_hi, ranges.elevation_hi;
  }
  return box;
}

int quantize_terrain(double v) {
  const int id = static_cast<int>(std::floor(v * kNumTerrains));
  return std::clamp(id, 0, kNumTerrains - 1);
}

int patch_of(int index, int size) {
  return std::min(kPatchesPerSide - 1, index * kPatchesPerSide / size);
}

Environment decode_env(const EnvParamVector& theta, const Environment& env_template) {
  if (theta.domain != param_domain_for(env_template))
    throw ShapeError("parameter domain does not match the template environment");
  const Box bounds = theta.bounds.dim() == 0 ? param_bounds(env_template) : theta.bounds;
  if (theta.values.size() != bounds.dim())
    throw ShapeError("expected " + std::to_string(bounds.dim()) + " environment parameters, got " +
                     std::to_string(theta.values.size()));
  if (!bounds.contains(theta.values)) throw BoundsError("environment parameters outside bounds");

  if (env_template.is_grid()) {
    TerrainGrid g = env_template.grid();
    for (int r = 0; r < g.size; ++r)
      for (int c = 0; c < g.size; ++c) {
        const int p = patch_of(r, g.size) * kPatchesPerSide + patch_of(c, g.size);
        g.terrain[g.cell_index({r, c})] = static_cast<std::uint8_t>(quantize_terrain(theta.values[p]));
      }
    return Environment::from_grid(std::move(g), env_template.gamma(), env_template.horizon());
  }
  StreetGraph g = env_template.graph();
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto k = static_cast<Eigen::Index>(3 * e);
    g.edges[e].distance = theta.values[k];
    g.edges[e].travel_time = theta.values[k + 1];
    g.edges[e].elevation_delta = theta.values[k + 2];
  }
  return Environment::from_graph(std::move(g), env_template.gamma(), env_template.horizon());
}

EnvParamVector encode_graph(const Environment& env_template, const EdgeFeatureRanges& ranges) {
  const auto& g = env_template.graph();
  EnvParamVector theta;
  theta.domain = ParamDomain::kGraphEdges;
  theta.bounds = param_bounds(env_template, ranges);
  theta.values.resize(static_cast<Eigen::Index>(3 * g.edges.size()));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto k = static_cast<Eigen::Index>(3 * e);
    theta.values[k] = g.edges[e].distance;
    theta.values[k + 1] = g.edges[e].travel_time;
    theta.values[k + 2] = g.edges[e].elevation_delta;
  }
  return theta;
}

StreetGraph sample_training_graph(std::uint64_t seed, const EdgeFeatureRanges& ranges) {
  StreetGraph g;
  g.directed = false;
  for (int i = 0; i < 9; ++i) g.nodes.push_back(i);
  g.start = 0;
  g.goal = 8;
  Rng rng(derive_seed(seed, {0x67726170ULL}));
  std::uniform_real_distribution<double> dist(ranges.distance_lo, ranges.distance_hi);
  std::uniform_real_distribution<double> time(ranges.time_lo, ranges.time_hi);
  std::uniform_real_distribution<double> elev(ranges.elevation_lo, ranges.elevation_hi);
  auto add = [&](int u, int v) {
    StreetEdge e;
    e.src = u;
    e.dst = v;
    e.distance = dist(rng);
    e.travel_time = time(rng);
    e.elevation_delta = elev(rng);
    g.edges.push_back(e);
  };
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 2; ++c) add(3 * r + c, 3 * r + c + 1);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) add(3 * r + c, 3 * (r + 1) + c);
  return g;
}

TerrainGrid uniform_grid(int size, Terrain terrain) {
  TerrainGrid g;
  g.size = size;
  g.terrain.assign(static_cast<std::size_t>(size * size), static_cast<std::uint8_t>(terrain));
  g.start = {0, 0};
  g.goal = {size - 1, size - 1};
  return g;
}

Environment load_environment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open environment file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return environment_from_json(j);
}

void save_environment(const Environment& env, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write environment file " + path.string());
  out << environment_to_json(env).dump(1) << '\n';
}

}  // namespace cred
