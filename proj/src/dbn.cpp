#include "carbonbn/dbn.hpp"

#include <algorithm>

#include "carbonbn/errors.hpp"

namespace carbonbn {

std::string next_slice_name(std::string_view node) { return std::string(node) + std::string(kNextSliceSuffix); }

std::size_t TwoSliceNetwork::transition_edge_count() const {
  std::size_t n = 0;
  for (const auto& c : transitions) n += c.parents.size();
  return n;
}

std::size_t TwoSliceNetwork::self_loop_count() const {
  return static_cast<std::size_t>(std::count_if(transitions.begin(), transitions.end(), [](const Cpt& c) {
    return std::find(c.parents.begin(), c.parents.end(), c.node) != c.parents.end();
  }));
}

void TwoSliceNetwork::validate() const {
  if (transitions.size() != static_net.size()) throw InputError("two-slice model needs one transition per node");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& c = transitions[i];
    if (c.node != static_net.name(i)) throw InputError("transition for " + c.node + " is out of node order");
    if (c.states != static_net.states(i)) throw InputError("transition states of " + c.node + " differ from slice T");
    for (std::size_t k = 0; k < c.parents.size(); ++k) {
      if (!static_net.dag().contains(c.parents[k]))
        throw InputError("transition parent " + c.parents[k] + " of " + c.node + " is not a slice-T node");
      if (c.parent_cards[k] != static_net.cardinality(static_net.index(c.parents[k])))
        throw InputError("transition parent " + c.parents[k] + " has the wrong cardinality");
    }
    c.validate();
  }
}

DiscretePanel build_lagged_panel(const DiscretePanel& panel) {
  const std::size_t n = panel.rows();
  if (n < 2) throw InputError("lagged panel needs at least two rows");
  const std::size_t m = panel.cols();
  DiscretePanel out;
  out.names = panel.names;
  for (const auto& name : panel.names) out.names.push_back(next_slice_name(name));
  out.states = panel.states;
  out.states.insert(out.states.end(), panel.states.begin(), panel.states.end());
  if (!panel.dates.empty()) out.dates.assign(panel.dates.begin(), panel.dates.end() - 1);
  for (std::size_t c = 0; c < m; ++c) out.codes.emplace_back(panel.codes[c].begin(), panel.codes[c].end() - 1);
  for (std::size_t c = 0; c < m; ++c) out.codes.emplace_back(panel.codes[c].begin() + 1, panel.codes[c].end());
  return out;
}

TwoSliceNetwork learn_transitions(const DiscretePanel& panel, const BayesianNetwork& static_net,
                                  const TransitionLearning& options, std::uint64_t seed) {
  if (panel.names != static_net.nodes()) throw InputError("panel columns must equal the static network's nodes");
  const std::size_t m = panel.cols();
  const DiscretePanel lagged = build_lagged_panel(panel);

  SearchControls controls = options.controls;
  controls.constraints = EdgeConstraints(2 * m, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) controls.constraints.set(i, m + j, true);

  Dag layer = options.single_run
                  ? tabu_search(lagged, options.score, controls, seed)
                  : bootstrap_consensus(lagged, options.score, controls, options.bootstrap, seed).dag;
  for (auto [p, c] : layer.edges())
    if (p >= m || c < m) throw NumericalError("transition search produced an edge outside the inter-slice layer");

  const BayesianNetwork fitted = fit_mle(layer, lagged);
  TwoSliceNetwork tsn{static_net, {}};
  for (std::size_t j = 0; j < m; ++j) {
    Cpt c = fitted.cpt(m + j);
    c.node = panel.names[j];
    tsn.transitions.push_back(std::move(c));
  }
  tsn.validate();
  return tsn;
}

BayesianNetwork unroll(const TwoSliceNetwork& tsn) {
  const auto& net = tsn.static_net;
  const std::size_t m = net.size();
  std::vector<std::string> names = net.nodes();
  for (std::size_t i = 0; i < m; ++i) names.push_back(next_slice_name(net.name(i)));
  Dag dag(names);
  for (auto [p, c] : net.dag().edges()) dag.add_edge(p, c);
  std::vector<Cpt> cpts;
  for (std::size_t i = 0; i < m; ++i) cpts.push_back(net.cpt(i));
  for (std::size_t j = 0; j < m; ++j) {
    Cpt c = tsn.transitions.at(j);
    for (const auto& p : c.parents) dag.add_edge(net.index(p), m + j);
    c.node = names[m + j];
    cpts.push_back(std::move(c));
  }
  return BayesianNetwork(std::move(dag), std::move(cpts), net.metadata());
}

TemporalReport temporal_query(const TwoSliceNetwork& tsn, const EvidenceMap& evidence_at_t, const std::string& target) {
  const auto& net = tsn.static_net;
  const auto t = net.index(target);
  resolve_evidence(net, evidence_at_t);  // slice-T names and states only

  TemporalReport out;
  const auto unrolled = unroll(tsn);
  out.at_next = posterior(unrolled, next_slice_name(target), evidence_at_t);
  out.at_next.target = target;
  if (auto it = evidence_at_t.find(target); it != evidence_at_t.end()) {
    out.at_t.target = target;
    out.at_t.states = net.states(t);
    out.at_t.evidence = evidence_at_t;
    out.at_t.distribution.assign(net.cardinality(t), 0.0);
    out.at_t.distribution[net.state_index(t, it->second)] = 1.0;
  } else {
    out.at_t = posterior(net, target, evidence_at_t);
  }
  return out;
}

}  // namespace carbonbn
