#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "carbonbn/network.hpp"

namespace carbonbn {

/// I(target; other) in nats from the exact pairwise joint.
double mutual_information(const BayesianNetwork& net, const std::string& target, const std::string& other);

/// First-order variance share of the target's state indicators explained by `input`:
/// sum_k Var(E[1{T=k} | input]) / sum_k Var(1{T=k}).
double sobol_index(const BayesianNetwork& net, const std::string& target, const std::string& input);

/// Largest total variation distance between two child rows that differ only in
/// the parent's state. With `whole_row`, the max runs over every pair of rows.
double arc_diameter(const BayesianNetwork& net, const std::string& parent, const std::string& child,
                    bool whole_row = false);

struct NodeSensitivity {
  std::string node;
  double mutual_information = 0.0;
  double sobol = 0.0;
  int mi_rank = 0;
  int sobol_rank = 0;
};

struct EdgeStrength {
  std::string parent;
  std::string child;
  double diameter = 0.0;
  int rank = 0;
};

struct SensitivityReport {
  std::string target;
  std::vector<NodeSensitivity> nodes;  // ordered by Sobol index, descending
  std::vector<EdgeStrength> edges;     // ordered by diameter, descending
};

SensitivityReport sensitivity_report(const BayesianNetwork& net, const std::string& target,
                                     bool whole_row_diameter = false);

/// Competition ranks (1 = largest; equal values share a rank).
std::vector<int> competition_ranks(const std::vector<double>& values);

struct TornadoEntry {
  std::string node;
  std::size_t configuration = 0;
  std::string parent_states;  // "A=High,B=Low", empty for root nodes
  std::string state;
  double theta = 0.0;
  double baseline_output = 0.0;
  double sensitivity_value = 0.0;
  int direction = 0;  // sign of sensitivity_value
  bool one_sided = false;
};

struct TornadoOptions {
  double delta = 0.05;
  std::size_t top_k = 10;
};

/// Sets entry (config, state) of `cpt` to `value` and rescales the rest of the
/// row proportionally; a row whose other entries are all zero shares the remainder evenly.
Cpt covary(const Cpt& cpt, std::size_t config, std::size_t state, double value);

/// One-way sensitivity of P(target = target_state) to every CPT entry, top_k by |value|.
std::vector<TornadoEntry> tornado(const BayesianNetwork& net, const std::string& target,
                                  const std::string& target_state, const TornadoOptions& options = {});

}  // namespace carbonbn
