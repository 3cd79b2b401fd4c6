#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "carbonbn/inference.hpp"
#include "carbonbn/network.hpp"
#include "carbonbn/structure.hpp"

namespace carbonbn {

/// Suffix naming a node's copy in slice T+1 of the unrolled network.
inline constexpr std::string_view kNextSliceSuffix = "@T+1";

std::string next_slice_name(std::string_view node);

/// Static slice-T network plus the inter-slice layer. transitions[i] is
/// P(node_i at T+1 | parents at T); its `node` and `parents` use slice-T names.
struct TwoSliceNetwork {
  BayesianNetwork static_net;
  std::vector<Cpt> transitions;

  std::vector<std::string> transition_parents(std::size_t node) const { return transitions.at(node).parents; }
  std::size_t transition_edge_count() const;
  std::size_t self_loop_count() const;

  /// Parents lie in slice T, nodes and states match static_net, rows are stochastic.
  void validate() const;
};

/// Row t pairs day t (columns named as in `panel`) with day t+1 (suffixed columns).
DiscretePanel build_lagged_panel(const DiscretePanel& panel);

struct TransitionLearning {
  BDeuConfig score;
  SearchControls controls;  // constraints are replaced by the inter-slice whitelist
  BootstrapOptions bootstrap;
  bool single_run = false;
};

/// Learns only inter-slice edges (node@T -> node@T+1) and fits their CPTs by MLE
/// on the lagged panel. The static network is carried over untouched.
TwoSliceNetwork learn_transitions(const DiscretePanel& panel, const BayesianNetwork& static_net,
                                  const TransitionLearning& options, std::uint64_t seed);

/// Slice T followed by slice T+1; T+1 nodes have only inter-slice parents.
BayesianNetwork unroll(const TwoSliceNetwork& tsn);

struct TemporalReport {
  PosteriorReport at_t;
  PosteriorReport at_next;
};

/// Target distribution at T and T+1 given evidence on slice-T nodes. When the
/// target itself is observed its slice-T report is the point mass.
TemporalReport temporal_query(const TwoSliceNetwork& tsn, const EvidenceMap& evidence_at_t, const std::string& target);

}  // namespace carbonbn
