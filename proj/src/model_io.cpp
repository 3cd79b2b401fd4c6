#include "carbonbn/model_io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "carbonbn/errors.hpp"

namespace carbonbn {

namespace {

constexpr double kRenormalizeTolerance = 1e-6;
// Rows already stochastic to rounding are kept bit-for-bit so round trips are exact.
constexpr double kExactTolerance = 1e-12;

Json metadata_to_json(const LearningMetadata& m) {
  Json out = Json::object();
  if (m.seed) out["seed"] = *m.seed;
  if (m.resamples) out["resamples"] = *m.resamples;
  if (m.threshold) out["threshold"] = *m.threshold;
  if (m.ess) out["ess"] = *m.ess;
  if (!m.provenance.empty()) out["provenance"] = m.provenance;
  return out;
}

LearningMetadata metadata_from_json(const Json& doc) {
  LearningMetadata m;
  if (!doc.is_object()) return m;
  if (doc.contains("seed") && !doc["seed"].is_null()) m.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("resamples") && !doc["resamples"].is_null()) m.resamples = doc["resamples"].get<int>();
  if (doc.contains("threshold") && !doc["threshold"].is_null()) m.threshold = doc["threshold"].get<double>();
  if (doc.contains("ess") && !doc["ess"].is_null()) m.ess = doc["ess"].get<double>();
  if (doc.contains("provenance")) m.provenance = doc["provenance"].get<std::string>();
  return m;
}

const Json& require(const Json& doc, const char* key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  return doc.at(key);
}

std::vector<std::vector<double>> read_rows(const Json& rows, const std::string& where) {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) {
    auto row = r.get<std::vector<double>>();
    double s = 0.0;
    for (double p : row) s += p;
    if (std::abs(s - 1.0) > kRenormalizeTolerance) {
      std::ostringstream msg;
      msg << where << ": row " << out.size() << " sums to " << std::setprecision(12) << s;
      throw InputError(msg.str());
    }
    if (std::abs(s - 1.0) > kExactTolerance)
      for (double& p : row) p /= s;
    out.push_back(std::move(row));
  }
  return out;
}

Cpt read_cpt(const std::string& node, const std::vector<std::string>& states, const Json& doc,
             const char* parents_key, const std::map<std::string, std::vector<std::string>>& all_states) {
  const std::string where = std::string("cpt ") + node;
  Cpt c;
  c.node = node;
  c.states = states;
  c.parents = require(doc, parents_key, where).get<std::vector<std::string>>();
  for (const auto& p : c.parents) {
    auto it = all_states.find(p);
    if (it == all_states.end()) throw InputError(where + ": unknown parent " + p);
    c.parent_cards.push_back(it->second.size());
  }
  c.rows = read_rows(require(doc, "rows", where), where);
  c.validate();
  return c;
}

Json cpt_rows(const Cpt& c) {
  Json rows = Json::array();
  for (const auto& r : c.rows) rows.push_back(r);
  return rows;
}

}  // namespace

Json network_to_json(const BayesianNetwork& net) {
  Json doc;
  doc["nodes"] = Json::array();
  for (std::size_t i = 0; i < net.size(); ++i) doc["nodes"].push_back({{"name", net.name(i)}, {"states", net.states(i)}});
  doc["edges"] = Json::array();
  for (auto [p, c] : net.dag().edges()) doc["edges"].push_back({net.name(p), net.name(c)});
  doc["cpts"] = Json::object();
  for (std::size_t i = 0; i < net.size(); ++i)
    doc["cpts"][net.name(i)] = {{"parents", net.cpt(i).parents}, {"rows", cpt_rows(net.cpt(i))}};
  doc["metadata"] = metadata_to_json(net.metadata());
  return doc;
}

BayesianNetwork network_from_json(const Json& doc) {
  try {
    std::vector<std::string> names;
    std::map<std::string, std::vector<std::string>> states;
    for (const auto& n : require(doc, "nodes", "model")) {
      auto name = require(n, "name", "node").get<std::string>();
      auto st = require(n, "states", "node " + name).get<std::vector<std::string>>();
      if (st.empty()) throw InputError("node " + name + " has no states");
      if (!states.emplace(name, std::move(st)).second) throw InputError("duplicate node " + name);
      names.push_back(std::move(name));
    }
    Dag dag(names);
    if (doc.contains("edges"))
      for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2) throw InputError("edges must be [parent, child] pairs");
        dag.add_edge(e[0].get<std::string>(), e[1].get<std::string>());
      }
    const auto& cpts = require(doc, "cpts", "model");
    std::vector<Cpt> tables;
    for (const auto& name : names) {
      if (!cpts.contains(name)) throw InputError("model: no CPT for node " + name);
      tables.push_back(read_cpt(name, states[name], cpts[name], "parents", states));
    }
    return BayesianNetwork(std::move(dag), std::move(tables),
                           metadata_from_json(doc.contains("metadata") ? doc["metadata"] : Json::object()));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model JSON: ") + e.what());
  }
}

Json two_slice_to_json(const TwoSliceNetwork& tsn) {
  Json doc = network_to_json(tsn.static_net);
  doc["transitions"] = Json::object();
  for (const auto& c : tsn.transitions) doc["transitions"][c.node] = {{"parents_at_T", c.parents}, {"rows", cpt_rows(c)}};
  return doc;
}

TwoSliceNetwork two_slice_from_json(const Json& doc) {
  TwoSliceNetwork tsn{network_from_json(doc), {}};
  try {
    const auto& net = tsn.static_net;
    std::map<std::string, std::vector<std::string>> states;
    for (std::size_t i = 0; i < net.size(); ++i) states[net.name(i)] = net.states(i);
    const auto& trans = require(doc, "transitions", "two-slice model");
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (!trans.contains(net.name(i))) throw InputError("two-slice model: no transition for " + net.name(i));
      tsn.transitions.push_back(read_cpt(net.name(i), net.states(i), trans[net.name(i)], "parents_at_T", states));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed two-slice JSON: ") + e.what());
  }
  tsn.validate();
  return tsn;
}

Json pdag_to_json(const Pdag& pdag) {
  Json doc;
  doc["directed"] = Json::array();
  doc["undirected"] = Json::array();
  for (auto [a, b] : pdag.directed) doc["directed"].push_back({pdag.nodes[a], pdag.nodes[b]});
  for (auto [a, b] : pdag.undirected) doc["undirected"].push_back({pdag.nodes[a], pdag.nodes[b]});
  return doc;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

BayesianNetwork load_network(const std::string& path) { return network_from_json(read_json_file(path)); }

TwoSliceNetwork load_two_slice(const std::string& path) { return two_slice_from_json(read_json_file(path)); }

std::string to_dot(const BayesianNetwork& net, const std::map<std::pair<std::string, std::string>, double>& diameters) {
  const Pdag eq = cpdag(net.dag());
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "digraph carbonbn {\n  node [shape=ellipse];\n";
  for (const auto& n : net.nodes()) out << "  \"" << n << "\";\n";
  for (auto [p, c] : net.dag().edges()) {
    auto it = diameters.find({net.name(p), net.name(c)});
    const double d = it == diameters.end() ? 0.0 : it->second;
    out << "  \"" << net.name(p) << "\" -> \"" << net.name(c) << "\" [penwidth=" << 0.5 + 7.5 * d;
    if (eq.is_undirected(p, c)) out << ", style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace carbonbn
