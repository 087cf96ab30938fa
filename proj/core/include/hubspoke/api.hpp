#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hubspoke/model.hpp"
#include "hubspoke/vrptw.hpp"

namespace hubspoke {

struct ApiOptions {
  /// Where instances, clusterings, sessions and designs are persisted.
  /// Empty keeps everything in memory.
  std::filesystem::path session_dir;
  std::size_t solver_workers = 2;
  /// Threads used inside one scenario solve.
  std::size_t solve_jobs = 1;
  Config config;
  SolveOptions solve;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;

  nlohmann::json json() const { return nlohmann::json::parse(body); }
};

/// The /api/v1 surface without any transport. Every non-2xx body is an
/// error object {code, message, details}.
class ApiService {
 public:
  explicit ApiService(ApiOptions options = {});
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  ApiResponse handle(std::string_view method, std::string_view path,
                     const std::map<std::string, std::string>& query = {},
                     std::string_view body = {});

  /// Registers an instance under `id` (or a fresh id) and returns the id.
  std::string add_instance(const Instance& instance, std::string id = {});

  /// Blocks until every queued solve job has finished.
  void wait_for_jobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP front end for an ApiService, with CORS for the UI origin.
class ApiServer {
 public:
  ApiServer(ApiService& service, std::string cors_origin = "*");
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Blocks serving requests until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hubspoke
