#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace cred {

using FeatureVector = Eigen::VectorXd;
using WeightVector = Eigen::VectorXd;

enum class Terrain : std::uint8_t { kBrick = 0, kGravel = 1, kSand = 2, kGrass = 3 };
inline constexpr int kNumTerrains = 4;
inline constexpr int kStreetFeatures = 3;

const char* terrain_name(Terrain t);

/// Grid moves. The numeric value is the action index used for tie-breaking.
enum class Move : int { kRight = 0, kDown = 1, kLeft = 2, kUp = 3 };
inline constexpr int kNumMoves = 4;

struct GridCell {
  int row = 0;
  int col = 0;
  bool operator==(const GridCell&) const = default;
};

/// Square terrain grid. `terrain` is row-major, one terrain id per cell.
struct TerrainGrid {
  int size = 15;
  std::vector<std::uint8_t> terrain;
  GridCell start{0, 0};
  GridCell goal{14, 14};

  int width() const { return size; }
  int height() const { return size; }
  int cell_index(GridCell c) const { return c.row * size + c.col; }
  GridCell cell_at(int index) const { return {index / size, index % size}; }
  Terrain terrain_at(GridCell c) const { return static_cast<Terrain>(terrain[cell_index(c)]); }

  bool operator==(const TerrainGrid&) const = default;
};

struct StreetEdge {
  std::int64_t src = 0;
  std::int64_t dst = 0;
  double distance = 1.0;
  double travel_time = 1.0;
  double elevation_delta = 0.0;

  bool operator==(const StreetEdge&) const = default;
};

/// Street network. Undirected edges may be traversed both ways; the reverse
/// traversal negates the elevation change.
struct StreetGraph {
  std::vector<std::int64_t> nodes;
  std::vector<StreetEdge> edges;
  std::int64_t start = 0;
  std::int64_t goal = 0;
  bool directed = false;

  bool operator==(const StreetGraph&) const = default;
};

/// One legal action out of a state.
struct Arc {
  int action = 0;   // grid: Move value; graph: index among the node's arcs
  int next = 0;     // successor state
  int edge = -1;    // graph: edge index, grid: -1
  bool reversed = false;
};

/// A deterministic navigation MDP over a grid or street graph.
///
/// Immutable after construction. States are cell indices (row-major) for
/// grids and node positions for graphs. The goal is absorbing and has no
/// outgoing arcs.
class Environment {
 public:
  static constexpr double kDefaultGamma = 0.95;

  /// Validates every invariant and throws InvariantError naming the failure.
  static Environment from_grid(TerrainGrid grid, double gamma = kDefaultGamma,
                               std::optional<int> horizon = std::nullopt);
  static Environment from_graph(StreetGraph graph, double gamma = kDefaultGamma,
                                std::optional<int> horizon = std::nullopt);

  /// 4 * size for grids (60 at 15x15), 3 * |nodes| for graphs.
  static int default_horizon(const TerrainGrid& grid);
  static int default_horizon(const StreetGraph& graph);

  bool is_grid() const { return std::holds_alternative<TerrainGrid>(world_); }
  const TerrainGrid& grid() const;
  const StreetGraph& graph() const;

  int feature_dim() const { return feature_dim_; }
  double gamma() const { return gamma_; }
  int horizon() const { return horizon_; }
  const std::string& id() const { return id_; }

  int num_states() const { return static_cast<int>(arc_offset_.size()) - 1; }
  int start_state() const { return start_state_; }
  int goal_state() const { return goal_state_; }

  std::span<const Arc> arcs(int state) const;
  /// Throws InvalidActionError when `action` is not legal at `state`.
  const Arc& arc(int state, int action) const;
  int next_state(int state, int action) const { return arc(state, action).next; }

  /// Features of one transition: one-hot of the entered cell's terrain, or
  /// the traversed edge's (distance, travel_time, elevation_delta).
  FeatureVector step_features(int state, int action) const;

  /// d x |arcs| matrix of per-arc features, aligned with arc_offset().
  const Eigen::MatrixXd& arc_features() const { return arc_features_; }
  std::span<const int> arc_offset() const { return arc_offset_; }

  bool goal_reachable_from(int state) const { return reaches_goal_[state] != 0; }

  /// Human-readable label of a state ("r,c" or node id).
  std::string state_label(int state) const;

  bool operator==(const Environment& other) const;

 private:
  Environment() = default;
  void build_grid();
  void build_graph();
  void finish();

  std::variant<TerrainGrid, StreetGraph> world_;
  int feature_dim_ = 0;
  double gamma_ = kDefaultGamma;
  int horizon_ = 0;
  std::string id_;
  int start_state_ = 0;
  int goal_state_ = 0;
  std::vector<int> arc_offset_;
  std::vector<Arc> arcs_;
  Eigen::MatrixXd arc_features_;
  std::vector<char> reaches_goal_;
};

struct Step {
  int state = 0;
  int action = 0;
  bool operator==(const Step&) const = default;
};

/// A rollout: (state, action) pairs starting at the start state.
struct Trajectory {
  std::string env_id;
  std::vector<Step> steps;
  int final_state = 0;
  FeatureVector features;

  /// Visited states, start and final state included.
  std::vector<int> states() const;
  bool reaches(int state) const { return final_state == state; }
};

/// Sum of step features along `traj`. Throws InvalidTrajectoryError when the
/// sequence is not connected or does not begin at the start state.
FeatureVector trajectory_features(const Environment& env, const Trajectory& traj);

/// Builds a trajectory from steps, validating it and caching its features.
Trajectory make_trajectory(const Environment& env, std::vector<Step> steps);

/// Features as they enter the preference likelihood: Phi / horizon.
FeatureVector preference_features(const Environment& env, const Trajectory& traj);

// ---------------------------------------------------------------------------
// Environment parameters (the design space of the outer optimization)

enum class ParamDomain { kGridPatch, kGraphEdges };

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd clip(Eigen::VectorXd x) const;
};

struct EnvParamVector {
  Eigen::VectorXd values;
  ParamDomain domain = ParamDomain::kGridPatch;
  Box bounds;
};

inline constexpr int kPatchesPerSide = 3;
inline constexpr int kGridPatchParams = kPatchesPerSide * kPatchesPerSide;

/// Training ranges of sampled street graphs.
struct EdgeFeatureRanges {
  double distance_lo = 1.0, distance_hi = 5.0;
  double time_lo = 2.0, time_hi = 5.0;
  double elevation_lo = -1.0, elevation_hi = 1.0;
};

ParamDomain param_domain_for(const Environment& env);
Box param_bounds(const Environment& env_template, const EdgeFeatureRanges& ranges = {});

/// Terrain id of a patch value: floor(4v), clamped to [0, 3].
int quantize_terrain(double v);

/// Patch row/column that a grid row/column falls in.
int patch_of(int index, int size);

/// Decodes a parameter vector onto a template. Grid patches repaint the
/// terrain; graph edges overwrite (distance, time, elevation) per edge.
Environment decode_env(const EnvParamVector& theta, const Environment& env_template);

/// Inverse of decode_env for graphs (the template's own edge features).
EnvParamVector encode_graph(const Environment& env_template,
                            const EdgeFeatureRanges& ranges = {});

/// Fixed 3x3-lattice topology (9 nodes, 12 undirected edges) with features
/// drawn uniformly from the training ranges. Start is node 0, goal node 8.
StreetGraph sample_training_graph(std::uint64_t seed, const EdgeFeatureRanges& ranges = {});

/// Grid with every cell set to `terrain`; start top-left, goal bottom-right.
TerrainGrid uniform_grid(int size, Terrain terrain = Terrain::kBrick);

// ---------------------------------------------------------------------------
// JSON environment files

Environment load_environment(const std::filesystem::path& path);
void save_environment(const Environment& env, const std::filesystem::path& path);

}  // namespace cred
