#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "carbonbn/dbn.hpp"
#include "carbonbn/model_io.hpp"
#include "carbonbn/network.hpp"

namespace carbonbn {

/// Immutable model state behind the API; every precomputed body equals the
/// serialization of a fresh module call.
struct ModelSnapshot {
  BayesianNetwork model;
  std::optional<TwoSliceNetwork> two_slice;
  Json network;                                  // GET /v1/network body
  std::map<std::string, std::string> baselines;  // node -> serialized empty-evidence posterior
  std::map<std::string, std::string> sensitivity;  // target -> serialized report

  static std::shared_ptr<const ModelSnapshot> build(BayesianNetwork model, std::optional<TwoSliceNetwork> two_slice = {});
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Routes one request against a snapshot (null when no model is loaded). Pure.
ApiResponse handle_request(const ModelSnapshot* snapshot, const ApiRequest& request);

/// Holds the current snapshot; reload swaps it atomically for new requests.
class ModelHolder {
 public:
  void load(std::shared_ptr<const ModelSnapshot> snapshot);
  std::shared_ptr<const ModelSnapshot> current() const;
  ApiResponse dispatch(const ApiRequest& request) const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const ModelSnapshot> snapshot_;
};

/// HTTP front end with CORS headers on every response.
class HttpServer {
 public:
  explicit HttpServer(ModelHolder& holder);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread. Returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace carbonbn
