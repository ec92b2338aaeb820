#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "goalnet/store.hpp"

namespace goalnet {

struct ApiRequest {
  std::string method;  // upper case
  std::string path;    // without query string
  std::map<std::string, std::string> headers;  // keys lower case
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::map<std::string, std::string> headers;
  std::string body;
};

struct Session {
  std::string token;
  UserId user;
};

struct ApiOptions {
  std::string cors_origin = "*";
};

/// HTTP facade. handle() is transport independent; serve() puts it behind
/// an HTTP/1.1 listener.
class ApiService {
 public:
  explicit ApiService(Store& store, ApiOptions options = {});
  ~ApiService();

  ApiResponse handle(const ApiRequest& request);

  /// Looks the bearer token up on every call, so revocations apply at once.
  std::optional<Session> authenticate(std::string_view token) const;

  /// Blocks until stop(). Port 0 picks a free port; `on_ready` receives the bound port.
  void serve(const std::string& host, int port, std::function<void(int)> on_ready = {});
  void stop();

 private:
  ApiResponse dispatch(const ApiRequest& request, const Session& session);
  void apply_cors(ApiResponse& response) const;

  Store& store_;
  ApiOptions options_;
  struct Listener;
  std::unique_ptr<Listener> listener_;
};

/// Splits "addr:port" (e.g. "127.0.0.1:8080"); throws Error(Config).
std::pair<std::string, int> parse_listen_address(std::string_view text);

}  // namespace goalnet
