#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cred/experiment.hpp"

namespace cred {

/// Error carrying the HTTP status the request should fail with.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct Session {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<PreferenceRecord> records;
  BeliefEnsemble ensemble;
  std::optional<PreferenceQuery> pending;
  std::string pending_id;
  bool fallback = false;

  int iteration() const { return static_cast<int>(records.size()); }
  bool complete(int t_pref) const { return iteration() >= t_pref; }
};

/// Live elicitation sessions. Each answer runs the same belief update and
/// next-query generation as run_experiment, with the human as the oracle.
/// Sessions are written to `state_dir` after every change and reloaded on
/// construction. Requests on one session serialize on its own mutex.
class SessionService {
 public:
  SessionService(ExperimentConfig config, Workspace workspace, std::filesystem::path state_dir);

  nlohmann::json create_session();
  nlohmann::json get_query(const std::string& id);
  nlohmann::json answer(const std::string& id, const nlohmann::json& body);
  nlohmann::json belief(const std::string& id);

  std::vector<std::string> session_ids() const;
  const ExperimentConfig& config() const { return config_; }

 private:
  struct Slot {
    std::mutex mutex;
    Session session;
  };

  std::shared_ptr<Slot> find(const std::string& id) const;
  void advance(Session& s);
  nlohmann::json query_payload(const Session& s) const;
  nlohmann::json belief_summary(const Session& s) const;
  void persist(const Session& s) const;
  Session restore(const nlohmann::json& j) const;

  ExperimentConfig config_;
  Workspace ws_;
  Generator condition_;
  std::filesystem::path state_dir_;
  mutable PolicySolver solver_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::uint64_t counter_ = 0;
};

/// HTTP front end over a SessionService.
class HttpServer {
 public:
  HttpServer(SessionService& service, const std::filesystem::path& ui_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); requires a prior bind.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving the HTTP API on `bind` ("host:port"). Static files under
/// `ui_dir` (if non-empty) are served at "/".
void serve(SessionService& service, const std::string& bind, const std::filesystem::path& ui_dir = {});

/// Parses "host:port"; a bare port binds 0.0.0.0.
std::pair<std::string, int> parse_bind_address(const std::string& bind);

}  // namespace cred
