#pragma once

#include <map>
#include <string>
#include <utility>

#include "json.hpp"

#include "carbonbn/dag.hpp"
#include "carbonbn/dbn.hpp"
#include "carbonbn/network.hpp"

namespace carbonbn {

using Json = nlohmann::json;

/// {nodes:[{name,states}], edges:[[parent,child]], cpts:{node:{parents,rows}}, metadata:{...}}
Json network_to_json(const BayesianNetwork& net);
/// Rows whose sums are off by at most 1e-6 are renormalized; anything worse is an InputError.
BayesianNetwork network_from_json(const Json& doc);

/// Static schema plus transitions:{node:{parents_at_T, rows}}.
Json two_slice_to_json(const TwoSliceNetwork& tsn);
TwoSliceNetwork two_slice_from_json(const Json& doc);

Json pdag_to_json(const Pdag& pdag);

Json read_json_file(const std::string& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::string& path, const Json& doc);

BayesianNetwork load_network(const std::string& path);
TwoSliceNetwork load_two_slice(const std::string& path);

/// Graphviz digraph with one penwidth per edge, proportional to its arc diameter.
/// Edges that are reversible within the equivalence class are dashed.
std::string to_dot(const BayesianNetwork& net, const std::map<std::pair<std::string, std::string>, double>& diameters);

}  // namespace carbonbn
