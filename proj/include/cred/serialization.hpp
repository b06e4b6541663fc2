#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cred/belief.hpp"
#include "cred/env.hpp"
#include "cred/envdesign.hpp"
#include "cred/querygen.hpp"

namespace cred {

using json = nlohmann::json;

json environment_to_json(const Environment& env);
/// Validates every invariant; throws ParseError or InvariantError.
Environment environment_from_json(const json& j);

json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j);

json trajectory_to_json(const Trajectory& t);
/// Rebuilds and re-validates a trajectory against its environment.
Trajectory trajectory_from_json(const json& j, const Environment& env);

json ensemble_to_json(const BeliefEnsemble& e);
BeliefEnsemble ensemble_from_json(const json& j);

json record_to_json(const PreferenceRecord& r);
PreferenceRecord record_from_json(const json& j);

/// Query with both trajectories, the environment id, tag and gain. With
/// `embed_env` the full environment is included as "env".
json query_to_json(const PreferenceQuery& q, bool embed_env = true);
PreferenceQuery query_from_json(const json& j);

json trace_to_json(const std::vector<TraceEntry>& trace);

json weights_to_json(const std::vector<WeightVector>& weights);
std::vector<WeightVector> weights_from_json(const json& j);

}  // namespace cred
