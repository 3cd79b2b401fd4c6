#include "carbonbn/service.hpp"

#include <thread>

#include "httplib.h"

#include "carbonbn/errors.hpp"
#include "carbonbn/inference.hpp"
#include "carbonbn/reports.hpp"
#include "carbonbn/sensitivity.hpp"

namespace carbonbn {

namespace {

ApiResponse json_response(int status, const Json& body) { return {status, body.dump()}; }

ApiResponse error_response(int status, const std::string& message) {
  return json_response(status, Json{{"error", message}, {"status", status}});
}

EvidenceMap parse_evidence(const Json& body) {
  EvidenceMap evidence;
  if (!body.contains("evidence") || body["evidence"].is_null()) return evidence;
  const auto& e = body["evidence"];
  if (!e.is_object()) throw InputError("evidence must be an object of node: state");
  for (const auto& [node, state] : e.items()) {
    if (!state.is_string()) throw InputError("state for " + node + " must be a string");
    evidence[node] = state.get<std::string>();
  }
  return evidence;
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw InputError("request body must be a JSON object");
  return doc;
}

std::string query_param(const ApiRequest& req, const std::string& key, const std::string& fallback = {}) {
  auto it = req.query.find(key);
  return it == req.query.end() ? fallback : it->second;
}

double parse_number(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InputError("query parameter " + key + " must be a number");
  }
}

ApiResponse post_query(const ModelSnapshot& snap, const ApiRequest& req) {
  const Json body = parse_body(req.body);
  const auto evidence = parse_evidence(body);
  if (!body.contains("target") || !body["target"].is_string()) throw InputError("target is required");
  const auto target = body["target"].get<std::string>();
  const std::string slice = body.value("slice", std::string("T"));
  if (slice == "T") {
    if (evidence.empty()) {
      snap.model.index(target);
      return {200, snap.baselines.at(target)};
    }
    return json_response(200, to_json(posterior(snap.model, target, evidence)));
  }
  if (slice != "T+1" && slice != "both") throw InputError("slice must be T, T+1 or both");
  if (!snap.two_slice) throw InputError("no two-slice model is loaded");
  const auto report = temporal_query(*snap.two_slice, evidence, target);
  return json_response(200, slice == "both" ? to_json(report) : to_json(report.at_next));
}

ApiResponse post_mpe(const ModelSnapshot& snap, const ApiRequest& req) {
  return json_response(200, to_json(mpe(snap.model, parse_evidence(parse_body(req.body)))));
}

ApiResponse get_sensitivity(const ModelSnapshot& snap, const ApiRequest& req) {
  const auto target = query_param(req, "target");
  if (target.empty()) throw InputError("target query parameter is required");
  auto it = snap.sensitivity.find(target);
  if (it == snap.sensitivity.end()) throw InputError("unknown node " + target);
  return {200, it->second};
}

ApiResponse get_tornado(const ModelSnapshot& snap, const ApiRequest& req) {
  const auto target = query_param(req, "target");
  const auto state = query_param(req, "state");
  if (target.empty() || state.empty()) throw InputError("target and state query parameters are required");
  TornadoOptions opt;
  if (auto k = query_param(req, "top_k"); !k.empty()) {
    const double v = parse_number(k, "top_k");
    if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) throw InputError("top_k must be a positive integer");
    opt.top_k = static_cast<std::size_t>(v);
  }
  if (auto d = query_param(req, "delta"); !d.empty()) opt.delta = parse_number(d, "delta");
  return json_response(200, to_json(tornado(snap.model, target, state, opt)));
}

}  // namespace

std::shared_ptr<const ModelSnapshot> ModelSnapshot::build(BayesianNetwork model, std::optional<TwoSliceNetwork> two_slice) {
  auto snap = std::make_shared<ModelSnapshot>();
  snap->model = std::move(model);
  snap->two_slice = std::move(two_slice);
  const auto& net = snap->model;

  Json doc = network_to_json(net);
  const Pdag eq = cpdag(net.dag());
  doc["arcs"] = Json::array();
  for (auto [p, c] : net.dag().edges())
    doc["arcs"].push_back({{"from", net.name(p)},
                           {"to", net.name(c)},
                           {"diameter", arc_diameter(net, net.name(p), net.name(c))},
                           {"undirected_in_cpdag", eq.is_undirected(std::min(p, c), std::max(p, c))}});
  doc["cpdag"] = pdag_to_json(eq);
  doc["two_slice"] = snap->two_slice.has_value();
  if (snap->two_slice) {
    doc["transitions"] = Json::object();
    for (const auto& t : snap->two_slice->transitions) doc["transitions"][t.node] = t.parents;
  }
  snap->network = std::move(doc);

  for (std::size_t i = 0; i < net.size(); ++i) {
    snap->baselines[net.name(i)] = to_json(posterior(net, net.name(i), {})).dump();
    if (net.size() > 1) snap->sensitivity[net.name(i)] = to_json(sensitivity_report(net, net.name(i))).dump();
  }
  return snap;
}

ApiResponse handle_request(const ModelSnapshot* snapshot, const ApiRequest& request) {
  static const std::map<std::string, std::string> routes{{"/v1/health", "GET"},      {"/v1/network", "GET"},
                                                         {"/v1/query", "POST"},      {"/v1/mpe", "POST"},
                                                         {"/v1/sensitivity", "GET"}, {"/v1/tornado", "GET"}};
  auto route = routes.find(request.path);
  if (route == routes.end()) return error_response(404, "no route " + request.path);
  if (request.method == "OPTIONS") return {204, ""};
  if (request.method != route->second) return error_response(405, request.method + " not allowed on " + request.path);
  if (request.path == "/v1/health")
    return json_response(200, Json{{"status", "ok"}, {"model_loaded", snapshot != nullptr}});
  if (!snapshot) return error_response(503, "no model loaded");
  try {
    if (request.path == "/v1/network") return json_response(200, snapshot->network);
    if (request.path == "/v1/query") return post_query(*snapshot, request);
    if (request.path == "/v1/mpe") return post_mpe(*snapshot, request);
    if (request.path == "/v1/sensitivity") return get_sensitivity(*snapshot, request);
    return get_tornado(*snapshot, request);
  } catch (const ZeroProbabilityEvidence& e) {
    return error_response(422, e.what());
  } catch (const InputError& e) {
    return error_response(400, e.what());
  } catch (const Json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

void ModelHolder::load(std::shared_ptr<const ModelSnapshot> snapshot) {
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const ModelSnapshot> ModelHolder::current() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

ApiResponse ModelHolder::dispatch(const ApiRequest& request) const {
  const auto snap = current();
  return handle_request(snap.get(), request);
}

struct HttpServer::Impl {
  explicit Impl(ModelHolder& h) : holder(h) {
    auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest api{req.method, req.path, {}, req.body};
      for (const auto& [k, v] : req.params) api.query.emplace(k, v);
      const ApiResponse out = holder.dispatch(api);
      res.status = out.status;
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      if (!out.body.empty()) res.set_content(out.body, "application/json");
    };
    const std::string any = R"(/.*)";
    server.Get(any, bridge);
    server.Post(any, bridge);
    server.Options(any, bridge);
    server.Put(any, bridge);
    server.Delete(any, bridge);
  }

  ModelHolder& holder;
  httplib::Server server;
  std::thread worker;
};

HttpServer::HttpServer(ModelHolder& holder) : impl_(std::make_unique<Impl>(holder)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) bound = impl_->server.bind_to_any_port(host);
  else if (!impl_->server.bind_to_port(host, port)) bound = -1;
  if (bound < 0) throw InputError("cannot bind " + host + ":" + std::to_string(port));
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) throw InputError("cannot listen on " + host + ":" + std::to_string(port));
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace carbonbn
