#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carbonbn/factor.hpp"
#include "carbonbn/network.hpp"

namespace carbonbn {

/// Hard evidence: node name -> state label.
using EvidenceMap = std::map<std::string, std::string>;

/// Per-node observed state index, or nullopt when unobserved.
using IndexedEvidence = std::vector<std::optional<std::size_t>>;

IndexedEvidence resolve_evidence(const BayesianNetwork& net, const EvidenceMap& evidence);

struct PosteriorReport {
  std::string target;
  std::vector<std::string> states;
  std::vector<double> distribution;
  EvidenceMap evidence;
};

struct MpeResult {
  std::map<std::string, std::string> assignment;  // non-evidence nodes only
  double log_probability = 0.0;  // log P(assignment, evidence)
  double log_evidence = 0.0;     // log P(evidence)
  EvidenceMap evidence;
};

struct InferenceOptions {
  /// Elimination order to use; empty selects min-fill. Variables that do not
  /// need eliminating are ignored and missing ones are appended.
  std::vector<std::size_t> elimination_order;
};

/// Exact P(target | evidence) by variable elimination.
PosteriorReport posterior(const BayesianNetwork& net, const std::string& target, const EvidenceMap& evidence,
                          const InferenceOptions& options = {});

/// Normalized joint P(query | evidence) over the given variables (factor vars are sorted).
Factor joint_marginal(const BayesianNetwork& net, const std::vector<std::size_t>& query,
                      const IndexedEvidence& evidence, const InferenceOptions& options = {});

double evidence_probability(const BayesianNetwork& net, const IndexedEvidence& evidence);

/// Most probable joint state of all non-evidence nodes. Ties resolve to the
/// assignment that is smallest in node order, comparing state indices.
MpeResult mpe(const BayesianNetwork& net, const EvidenceMap& evidence);

struct SweepOptions {
  bool include_neutral = false;
  bool all_states = false;  // every state of every node
};

struct SweepRow {
  std::string node;
  std::string state;
  std::vector<double> distribution;
  double tvd = 0.0;  // total variation distance from the baseline
};

struct SweepTable {
  std::string target;
  std::vector<std::string> target_states;
  std::vector<double> baseline;
  std::vector<SweepRow> rows;  // sorted by tvd, descending; ties keep node order
};

/// Sets each other node to High / Low (and optionally Neutral) in turn and
/// records the target's posterior. Rows whose evidence has zero probability are omitted.
SweepTable evidence_sweep(const BayesianNetwork& net, const std::string& target, const SweepOptions& options = {});

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

/// Min-fill order over `vars` for the interaction graph of `factors`.
std::vector<std::size_t> min_fill_order(const std::vector<Factor>& factors, std::vector<std::size_t> vars);

}  // namespace carbonbn
