#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace splitaudit {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t max_upload_bytes = 64u << 20;
  std::string cors_origin = "*";
  // POST /datasets may register files by path only below this directory.
  std::optional<std::filesystem::path> data_root;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::multimap<std::string, std::string>;

// Routing and handlers for /api/v1, independent of the transport. Thread-safe:
// registered logs are immutable and report bodies are cached after computing.
class ApiService {
 public:
  explicit ApiService(ServerOptions options = {});
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  ApiResponse handle(std::string_view method, std::string_view path, const QueryParams& query,
                     std::string_view body, std::string_view content_type = "application/json");

  const ServerOptions& options() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// HTTP front end for ApiService.
class ApiServer {
 public:
  explicit ApiServer(ServerOptions options);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds the listening socket and returns the port. Throws kIo on failure.
  int bind();
  // Blocks serving requests until stop() is called; requires bind().
  void serve();
  void stop();
  // Blocks until serve() is accepting connections.
  void wait_until_ready() const;

  ApiService& service();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace splitaudit
