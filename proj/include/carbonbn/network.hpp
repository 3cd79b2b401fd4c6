#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carbonbn/dag.hpp"
#include "carbonbn/discrete.hpp"

namespace carbonbn {

/// P(node | parents). Parent configurations are enumerated row-major over the
/// ordered parent list: the first parent varies slowest, the last fastest.
struct Cpt {
  std::string node;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  std::vector<std::size_t> parent_cards;
  std::vector<std::vector<double>> rows;

  std::size_t cardinality() const { return states.size(); }
  std::size_t configurations() const;
  std::size_t config_index(std::span<const std::size_t> parent_states) const;
  std::vector<std::size_t> config_states(std::size_t config) const;

  /// Rows sum to 1 within 1e-9, entries are non-negative, row count matches.
  void validate() const;
};

struct LearningMetadata {
  std::optional<std::uint64_t> seed;
  std::optional<int> resamples;
  std::optional<double> threshold;
  std::optional<double> ess;
  std::string provenance;
};

/// A DAG over categorical nodes with one CPT per node. Immutable once built.
class BayesianNetwork {
 public:
  BayesianNetwork() = default;
  BayesianNetwork(Dag dag, std::vector<Cpt> cpts, LearningMetadata metadata = {});

  const Dag& dag() const { return dag_; }
  std::size_t size() const { return dag_.size(); }
  const std::vector<std::string>& nodes() const { return dag_.nodes(); }
  const std::string& name(std::size_t node) const { return dag_.nodes()[node]; }
  std::size_t index(std::string_view name) const { return dag_.index(name); }
  const Cpt& cpt(std::size_t node) const { return cpts_[node]; }
  const Cpt& cpt(std::string_view name) const { return cpts_[index(name)]; }
  const std::vector<std::string>& states(std::size_t node) const { return cpts_[node].states; }
  std::size_t cardinality(std::size_t node) const { return cpts_[node].states.size(); }
  std::size_t state_index(std::size_t node, std::string_view state) const;
  /// Indices of the CPT's parents in CPT order.
  const std::vector<std::size_t>& cpt_parent_indices(std::size_t node) const { return parent_index_[node]; }
  const LearningMetadata& metadata() const { return metadata_; }

  /// Copy with one CPT replaced (same node, parents and states).
  BayesianNetwork with_cpt(std::size_t node, Cpt cpt) const;

 private:
  Dag dag_;
  std::vector<Cpt> cpts_;
  std::vector<std::vector<std::size_t>> parent_index_;
  LearningMetadata metadata_;
};

/// Maximum-likelihood CPTs for `dag` from panel columns with the same names.
/// Parent configurations never observed get a uniform row.
BayesianNetwork fit_mle(const Dag& dag, const DiscretePanel& data, LearningMetadata metadata = {});

/// log P(x) for a full assignment (state index per node) via the chain-rule product.
double log_joint(const BayesianNetwork& net, std::span<const std::size_t> assignment);

}  // namespace carbonbn
