#include "cred/serialization.hpp"

#include "cred/error.hpp"

namespace cred {

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

json environment_to_json(const Environment& env) {
  json j;
  if (env.is_grid()) {
    const auto& g = env.grid();
    j["type"] = "grid";
    j["size"] = g.size;
    json rows = json::array();
    for (int r = 0; r < g.size; ++r) {
      json row = json::array();
      for (int c = 0; c < g.size; ++c) row.push_back(static_cast<int>(g.terrain[g.cell_index({r, c})]));
      rows.push_back(std::move(row));
    }
    j["terrain"] = std::move(rows);
    j["start"] = {g.start.row, g.start.col};
    j["goal"] = {g.goal.row, g.goal.col};
  } else {
    const auto& g = env.graph();
    j["type"] = "graph";
    j["nodes"] = g.nodes;
    json edges = json::array();
    for (const auto& e : g.edges)
      edges.push_back({{"src", e.src}, {"dst", e.dst}, {"distance", e.distance},
                       {"time", e.travel_time}, {"elev", e.elevation_delta}});
    j["edges"] = std::move(edges);
    j["start"] = g.start;
    j["goal"] = g.goal;
    j["directed"] = g.directed;
  }
  j["gamma"] = env.gamma();
  j["horizon"] = env.horizon();
  return j;
}

Environment environment_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    const double gamma = j.value("gamma", Environment::kDefaultGamma);
    std::optional<int> horizon;
    if (j.contains("horizon")) horizon = j.at("horizon").get<int>();
    if (type == "grid") {
      TerrainGrid g;
      g.size = j.at("size").get<int>();
      const auto& rows = j.at("terrain");
      if (!rows.is_array() || static_cast<int>(rows.size()) != g.size)
        throw InvariantError("terrain must have `size` rows");
      for (const auto& row : rows) {
        if (!row.is_array() || static_cast<int>(row.size()) != g.size)
          throw InvariantError("terrain rows must have `size` cells");
        for (const auto& cell : row) {
          const int id = cell.get<int>();
          if (id < 0 || id >= kNumTerrains) throw InvariantError("terrain id out of range");
          g.terrain.push_back(static_cast<std::uint8_t>(id));
        }
      }
      g.start = {j.at("start").at(0).get<int>(), j.at("start").at(1).get<int>()};
      g.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
      return Environment::from_grid(std::move(g), gamma, horizon);
    }
    if (type == "graph") {
      StreetGraph g;
      g.nodes = j.at("nodes").get<std::vector<std::int64_t>>();
      for (const auto& e : j.at("edges")) {
        StreetEdge edge;
        edge.src = e.at("src").get<std::int64_t>();
        edge.dst = e.at("dst").get<std::int64_t>();
        edge.distance = e.at("distance").get<double>();
        edge.travel_time = e.at("time").get<double>();
        edge.elevation_delta = e.at("elev").get<double>();
        g.edges.push_back(edge);
      }
      g.start = j.at("start").get<std::int64_t>();
      g.goal = j.at("goal").get<std::int64_t>();
      g.directed = j.value("directed", false);
      return Environment::from_graph(std::move(g), gamma, horizon);
    }
    throw ParseError("unknown environment type '" + type + "'");
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed environment: ") + e.what());
  }
}

json trajectory_to_json(const Trajectory& t) {
  json steps = json::array();
  for (const Step& s : t.steps) steps.push_back({s.state, s.action});
  return {{"env_id", t.env_id},
          {"steps", std::move(steps)},
          {"states", t.states()},
          {"features", vector_to_json(t.features)}};
}

Trajectory trajectory_from_json(const json& j, const Environment& env) {
  std::vector<Step> steps;
  try {
    for (const auto& s : j.at("steps")) steps.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed trajectory: ") + e.what());
  }
  return make_trajectory(env, std::move(steps));
}

json ensemble_to_json(const BeliefEnsemble& e) {
  json samples = json::array();
  for (int m = 0; m < e.size(); ++m) samples.push_back(vector_to_json(e.sample(m)));
  return {{"samples", std::move(samples)},
          {"seed", e.seed},
          {"burn_in", e.burn_in},
          {"thin", e.thin},
          {"acceptance_rate", e.acceptance_rate}};
}

BeliefEnsemble ensemble_from_json(const json& j) {
  BeliefEnsemble e;
  try {
    const auto& samples = j.at("samples");
    const auto n = static_cast<Eigen::Index>(samples.size());
    const auto d = n > 0 ? static_cast<Eigen::Index>(samples.at(0).size()) : 0;
    e.samples.resize(d, n);
    for (Eigen::Index m = 0; m < n; ++m) {
      const Eigen::VectorXd v = vector_from_json(samples.at(static_cast<std::size_t>(m)));
      if (v.size() != d) throw ParseError("ensemble samples differ in dimension");
      e.samples.col(m) = v;
    }
    e.seed = j.at("seed").get<std::uint64_t>();
    e.burn_in = j.at("burn_in").get<int>();
    e.thin = j.at("thin").get<int>();
    e.acceptance_rate = j.at("acceptance_rate").get<double>();
  } catch (const json::exception& ex) {
    throw ParseError(std::string("malformed ensemble: ") + ex.what());
  }
  return e;
}

json record_to_json(const PreferenceRecord& r) {
  return {{"phi_a", vector_to_json(r.phi_a)}, {"phi_b", vector_to_json(r.phi_b)},
          {"label", r.label}, {"env_id", r.env_id}, {"iteration", r.iteration}};
}

PreferenceRecord record_from_json(const json& j) {
  PreferenceRecord r;
  try {
    r.phi_a = vector_from_json(j.at("phi_a"));
    r.phi_b = vector_from_json(j.at("phi_b"));
    r.label = j.at("label").get<int>();
    r.env_id = j.at("env_id").get<std::string>();
    r.iteration = j.at("iteration").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed preference record: ") + e.what());
  }
  if (r.label != 1 && r.label != -1) throw ParseError("preference label must be +1 or -1");
  return r;
}

json query_to_json(const PreferenceQuery& q, bool embed_env) {
  json j{{"env_id", q.env_id()},
         {"generator", generator_name(q.generator)},
         {"info_gain", q.info_gain},
         {"traj_a", trajectory_to_json(q.a)},
         {"traj_b", trajectory_to_json(q.b)}};
  if (embed_env) j["env"] = environment_to_json(*q.env);
  return j;
}

PreferenceQuery query_from_json(const json& j) {
  PreferenceQuery q;
  try {
    q.env = std::make_shared<const Environment>(environment_from_json(j.at("env")));
    q.a = trajectory_from_json(j.at("traj_a"), *q.env);
    q.b = trajectory_from_json(j.at("traj_b"), *q.env);
    q.info_gain = j.at("info_gain").get<double>();
    q.generator = generator_from_name(j.at("generator").get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed query: ") + e.what());
  }
  return q;
}

json trace_to_json(const std::vector<TraceEntry>& trace) {
  json arr = json::array();
  for (const auto& e : trace)
    arr.push_back({{"theta", vector_to_json(e.theta)},
                   {"info_gain", e.value},
                   {"valid", e.valid},
                   {"wall_time", e.wall_time_s}});
  return arr;
}

json weights_to_json(const std::vector<WeightVector>& weights) {
  json arr = json::array();
  for (const auto& w : weights) arr.push_back(vector_to_json(w));
  return arr;
}

std::vector<WeightVector> weights_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("expected an array of weight vectors");
  std::vector<WeightVector> out;
  for (const auto& w : j) out.push_back(vector_from_json(w));
  return out;
}

}  // namespace cred
