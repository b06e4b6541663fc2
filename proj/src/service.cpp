#include "cred/service.hpp"

#include <chrono>
#include <fstream>
#include <random>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "cred/error.hpp"
#include "cred/serialization.hpp"

namespace cred {

namespace {

constexpr std::uint64_t kSessionStream = 0x7365;

std::string hex_id(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

int parse_label(const json& body) {
  if (!body.is_object() || !body.contains("label")) throw ServiceError(400, "missing label");
  const json& l = body.at("label");
  if (l.is_string()) {
    const auto s = l.get<std::string>();
    if (s == "+1" || s == "1") return 1;
    if (s == "-1") return -1;
  } else if (l.is_number_integer()) {
    const auto v = l.get<long long>();
    if (v == 1 || v == -1) return static_cast<int>(v);
  }
  throw ServiceError(400, "label must be \"+1\" or \"-1\"");
}

}  // namespace

SessionService::SessionService(ExperimentConfig config, Workspace workspace,
                               std::filesystem::path state_dir)
    : config_(std::move(config)),
      ws_(std::move(workspace)),
      condition_(config_.conditions.front()),
      state_dir_(std::move(state_dir)),
      solver_(config_.planner) {
  if (state_dir_.empty()) return;
  std::filesystem::create_directories(state_dir_);
  for (const auto& entry : std::filesystem::directory_iterator(state_dir_)) {
    if (entry.path().extension() != ".json") continue;
    try {
      std::ifstream in(entry.path());
      json j;
      in >> j;
      auto slot = std::make_shared<Slot>();
      slot->session = restore(j);
      sessions_[slot->session.id] = slot;
    } catch (const std::exception& e) {
      spdlog::warn("skipping unreadable session file {}: {}", entry.path().string(), e.what());
    }
  }
  counter_ = sessions_.size();
  if (!sessions_.empty()) spdlog::info("restored {} session(s) from {}", sessions_.size(), state_dir_.string());
}

std::shared_ptr<SessionService::Slot> SessionService::find(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown session '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionService::session_ids() const {
  std::lock_guard lock(registry_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, slot] : sessions_) ids.push_back(id);
  return ids;
}

void SessionService::advance(Session& s) {
  const int dim = ws_.train->feature_dim();
  const auto iter = static_cast<std::uint64_t>(s.iteration());
  s.ensemble = update_belief(config_, s.records, dim, derive_seed(s.seed, {kSessionStream, 0, iter}));
  s.pending.reset();
  s.pending_id.clear();
  s.fallback = false;
  if (s.complete(config_.iterations)) return;
  QueryOutcome outcome = generate_query(config_, condition_, ws_.train, s.ensemble, solver_,
                                        derive_seed(s.seed, {kSessionStream, 1, iter}));
  s.fallback = outcome.fallback;
  s.pending = std::move(outcome.query);
  s.pending_id = s.id + "-" + std::to_string(iter + 1);
}

json SessionService::create_session() {
  std::shared_ptr<Slot> slot = std::make_shared<Slot>();
  {
    std::lock_guard lock(registry_mutex_);
    std::random_device rd;
    std::string id;
    do {
      const std::uint64_t entropy = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
          static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
      id = hex_id(mix_seed(entropy + counter_++));
    } while (sessions_.count(id));
    slot->session.id = id;
    slot->session.seed = derive_seed(config_.seeds.front(), {kSessionStream, std::hash<std::string>{}(id)});
    sessions_[id] = slot;
  }
  std::lock_guard lock(slot->mutex);
  advance(slot->session);
  persist(slot->session);
  return {{"session_id", slot->session.id}};
}

json SessionService::query_payload(const Session& s) const {
  if (!s.pending) return {{"status", "complete"}, {"belief_summary", belief_summary(s)}};
  json q = query_to_json(*s.pending, true);
  q["query_id"] = s.pending_id;
  q["iteration"] = s.iteration() + 1;
  q["iterations"] = config_.iterations;
  q["status"] = "active";
  q["fallback"] = s.fallback;
  return q;
}

json SessionService::belief_summary(const Session& s) const {
  return {{"mean_weight", vector_to_json(s.ensemble.mean())},
          {"entropy", entropy(s.ensemble, config_.metrics.entropy_grid_points)},
          {"sample_count", s.ensemble.size()},
          {"iteration", s.iteration()}};
}

json SessionService::get_query(const std::string& id) {
  auto slot = find(id);
  std::lock_guard lock(slot->mutex);
  return query_payload(slot->session);
}

json SessionService::answer(const std::string& id, const json& body) {
  auto slot = find(id);
  std::lock_guard lock(slot->mutex);
  Session& s = slot->session;
  if (!body.is_object() || !body.contains("query_id") || !body.at("query_id").is_string())
    throw ServiceError(400, "missing query_id");
  const int label = parse_label(body);
  if (!s.pending) throw ServiceError(409, "session is complete");
  if (body.at("query_id").get<std::string>() != s.pending_id)
    throw ServiceError(409, "stale query_id; current is '" + s.pending_id + "'");
  s.records.push_back(make_record(*s.pending, label, s.iteration() + 1));
  advance(s);
  persist(s);
  json out{{"belief_summary", belief_summary(s)}};
  if (s.pending) {
    out["status"] = "active";
    out["next_query"] = query_payload(s);
  } else {
    out["status"] = "complete";
  }
  return out;
}

json SessionService::belief(const std::string& id) {
  auto slot = find(id);
  std::lock_guard lock(slot->mutex);
  return belief_summary(slot->session);
}

void SessionService::persist(const Session& s) const {
  if (state_dir_.empty()) return;
  json records = json::array();
  for (const auto& r : s.records) records.push_back(record_to_json(r));
  json j{{"id", s.id},
         {"seed", s.seed},
         {"records", records},
         {"ensemble", ensemble_to_json(s.ensemble)},
         {"pending_id", s.pending_id},
         {"fallback", s.fallback}};
  if (s.pending) j["pending"] = query_to_json(*s.pending, true);
  const auto path = state_dir_ / (s.id + ".json");
  const auto tmp = state_dir_ / (s.id + ".json.tmp");
  {
    std::ofstream out(tmp);
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
}

Session SessionService::restore(const json& j) const {
  Session s;
  s.id = j.at("id").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& r : j.at("records")) s.records.push_back(record_from_json(r));
  s.ensemble = ensemble_from_json(j.at("ensemble"));
  s.pending_id = j.at("pending_id").get<std::string>();
  s.fallback = j.value("fallback", false);
  if (j.contains("pending")) s.pending = query_from_json(j.at("pending"));
  return s;
}

std::pair<std::string, int> parse_bind_address(const std::string& bind) {
  const auto colon = bind.rfind(':');
  std::string host = colon == std::string::npos ? "0.0.0.0" : bind.substr(0, colon);
  const std::string port = colon == std::string::npos ? bind : bind.substr(colon + 1);
  if (host.empty()) host = "0.0.0.0";
  try {
    std::size_t used = 0;
    const int p = std::stoi(port, &used);
    if (used != port.size() || p < 0 || p > 65535) throw std::out_of_range("port");
    return {host, p};
  } catch (const std::exception&) {
    throw ConfigError("bad bind address '" + bind + "'");
  }
}

namespace {

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    reply(res, 200, f());
  } catch (const ServiceError& e) {
    reply(res, e.status(), {{"error", e.what()}});
  } catch (const json::exception& e) {
    reply(res, 400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    reply(res, 500, {{"error", e.what()}});
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(400, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(SessionService& service, const std::filesystem::path& ui_dir)
    : impl_(std::make_unique<Impl>()) {
  httplib::Server& server = impl_->server;
  server.Post("/sessions", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { return service.create_session(); });
  });
  server.Get(R"(/sessions/([^/]+)/query)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service.get_query(req.matches[1]); });
  });
  server.Post(R"(/sessions/([^/]+)/answer)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service.answer(req.matches[1], parse_body(req)); });
  });
  server.Get(R"(/sessions/([^/]+)/belief)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { return service.belief(req.matches[1]); });
  });
  if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir.string()))
    spdlog::warn("ui directory {} not found; serving the API only", ui_dir.string());
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = impl_->server.bind_to_any_port(host);
    if (p < 0) throw Error("cannot bind " + host);
    return p;
  }
  if (!impl_->server.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() {
  if (!impl_->server.listen_after_bind()) throw Error("server stopped with an error");
}

void HttpServer::stop() { impl_->server.stop(); }

void serve(SessionService& service, const std::string& bind, const std::filesystem::path& ui_dir) {
  const auto [host, port] = parse_bind_address(bind);
  HttpServer server(service, ui_dir);
  const int bound = server.bind(host, port);
  spdlog::info("serving on {}:{}", host, bound);
  server.run();
}

}  // namespace cred
