#include "carbonbn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carbonbn/bdeu.hpp"
#include "carbonbn/errors.hpp"

namespace carbonbn {

std::size_t Cpt::configurations() const {
  std::size_t q = 1;
  for (auto c : parent_cards) q *= c;
  return q;
}

std::size_t Cpt::config_index(std::span<const std::size_t> parent_states) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < parent_cards.size(); ++i) idx = idx * parent_cards[i] + parent_states[i];
  return idx;
}

std::vector<std::size_t> Cpt::config_states(std::size_t config) const {
  std::vector<std::size_t> out(parent_cards.size());
  for (std::size_t i = parent_cards.size(); i-- > 0;) {
    out[i] = config % parent_cards[i];
    config /= parent_cards[i];
  }
  return out;
}

void Cpt::validate() const {
  if (states.empty()) throw InputError("CPT for " + node + " has no states");
  if (parent_cards.size() != parents.size()) throw InputError("CPT for " + node + " has inconsistent parent cards");
  if (rows.size() != configurations())
    throw InputError("CPT for " + node + " has " + std::to_string(rows.size()) + " rows, expected " +
                     std::to_string(configurations()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& row = rows[j];
    if (row.size() != states.size()) throw InputError("CPT for " + node + " row " + std::to_string(j) + " has wrong width");
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw InputError("CPT for " + node + " has a negative or non-finite entry");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InputError("CPT for " + node + " row " + std::to_string(j) + " does not sum to 1");
  }
}

BayesianNetwork::BayesianNetwork(Dag dag, std::vector<Cpt> cpts, LearningMetadata metadata)
    : dag_(std::move(dag)), metadata_(std::move(metadata)) {
  if (cpts.size() != dag_.size()) throw InputError("need exactly one CPT per node");
  cpts_.resize(dag_.size());
  std::vector<char> seen(dag_.size(), 0);
  for (auto& cpt : cpts) {
    const auto i = dag_.index(cpt.node);
    if (seen[i]) throw InputError("duplicate CPT for " + cpt.node);
    seen[i] = 1;
    cpts_[i] = std::move(cpt);
  }
  parent_index_.resize(dag_.size());
  for (std::size_t i = 0; i < dag_.size(); ++i) {
    auto& cpt = cpts_[i];
    std::vector<std::size_t> idx;
    for (const auto& p : cpt.parents) idx.push_back(dag_.index(p));
    auto sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != dag_.parents(i)) throw InputError("CPT parents of " + cpt.node + " differ from graph parents");
    for (std::size_t k = 0; k < idx.size(); ++k)
      if (cpt.parent_cards[k] != cpts_[idx[k]].states.size())
        throw InputError("CPT for " + cpt.node + " uses wrong cardinality for parent " + cpt.parents[k]);
    cpt.validate();
    parent_index_[i] = std::move(idx);
  }
}

std::size_t BayesianNetwork::state_index(std::size_t node, std::string_view state) const {
  const auto& s = cpts_[node].states;
  auto it = std::find(s.begin(), s.end(), state);
  if (it == s.end()) throw InputError("node " + name(node) + " has no state '" + std::string(state) + "'");
  return static_cast<std::size_t>(it - s.begin());
}

BayesianNetwork BayesianNetwork::with_cpt(std::size_t node, Cpt cpt) const {
  BayesianNetwork copy = *this;
  if (cpt.node != cpts_[node].node || cpt.parents != cpts_[node].parents || cpt.states != cpts_[node].states)
    throw InputError("replacement CPT must keep node, parents and states");
  cpt.validate();
  copy.cpts_[node] = std::move(cpt);
  return copy;
}

BayesianNetwork fit_mle(const Dag& dag, const DiscretePanel& data, LearningMetadata metadata) {
  std::vector<Cpt> cpts;
  for (std::size_t i = 0; i < dag.size(); ++i) {
    const auto col = data.column_index(dag.nodes()[i]);
    std::vector<std::size_t> parent_cols;
    Cpt cpt;
    cpt.node = dag.nodes()[i];
    cpt.states = data.states[col];
    for (auto p : dag.parents(i)) {
      const auto pc = data.column_index(dag.nodes()[p]);
      parent_cols.push_back(pc);
      cpt.parents.push_back(dag.nodes()[p]);
      cpt.parent_cards.push_back(data.arity(pc));
    }
    const auto counts = count_families(data, col, parent_cols);
    const std::size_t r = counts.arity;
    cpt.rows.resize(counts.configurations());
    for (std::size_t j = 0; j < counts.configurations(); ++j) {
      auto& row = cpt.rows[j];
      row.resize(r);
      const auto total = counts.marginals[j];
      for (std::size_t k = 0; k < r; ++k)
        row[k] = total == 0 ? 1.0 / static_cast<double>(r)
                            : static_cast<double>(counts.at(j, k)) / static_cast<double>(total);
    }
    cpts.push_back(std::move(cpt));
  }
  return BayesianNetwork(dag, std::move(cpts), std::move(metadata));
}

double log_joint(const BayesianNetwork& net, std::span<const std::size_t> assignment) {
  if (assignment.size() != net.size()) throw InputError("assignment must cover every node");
  double total = 0.0;
  std::vector<std::size_t> ps;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& cpt = net.cpt(i);
    ps.clear();
    for (auto p : net.cpt_parent_indices(i)) ps.push_back(assignment[p]);
    total += std::log(cpt.rows[cpt.config_index(ps)][assignment[i]]);
  }
  return total;
}

}  // namespace carbonbn
