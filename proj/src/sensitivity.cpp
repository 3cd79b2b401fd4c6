#include "carbonbn/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carbonbn/errors.hpp"
#include "carbonbn/inference.hpp"

namespace carbonbn {

namespace {

// Joint P(a, b) as a dense |a| x |b| matrix.
std::vector<std::vector<double>> pair_joint(const BayesianNetwork& net, std::size_t a, std::size_t b) {
  const IndexedEvidence none(net.size());
  const Factor f = joint_marginal(net, {a, b}, none);
  std::vector<std::vector<double>> out(net.cardinality(a), std::vector<double>(net.cardinality(b)));
  const bool a_first = f.vars().front() == a;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out[i].size(); ++j) {
      const std::size_t states[2] = {a_first ? i : j, a_first ? j : i};
      out[i][j] = f.at(states);
    }
  return out;
}

bool is_ancestor_or_self(const Dag& dag, std::size_t node, std::size_t of) { return dag.has_path(node, of); }

}  // namespace

double mutual_information(const BayesianNetwork& net, const std::string& target, const std::string& other) {
  const auto t = net.index(target);
  const auto o = net.index(other);
  if (t == o) throw InputError("mutual information needs two distinct nodes");
  const auto joint = pair_joint(net, t, o);
  std::vector<double> pt(joint.size(), 0.0), po(joint.front().size(), 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i)
    for (std::size_t j = 0; j < joint[i].size(); ++j) {
      pt[i] += joint[i][j];
      po[j] += joint[i][j];
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i)
    for (std::size_t j = 0; j < joint[i].size(); ++j)
      if (joint[i][j] > 0.0) mi += joint[i][j] * std::log(joint[i][j] / (pt[i] * po[j]));
  return std::max(mi, 0.0);
}

double sobol_index(const BayesianNetwork& net, const std::string& target, const std::string& input) {
  const auto t = net.index(target);
  const auto x = net.index(input);
  if (t == x) throw InputError("Sobol index needs two distinct nodes");
  const auto joint = pair_joint(net, t, x);
  const std::size_t rt = joint.size();
  const std::size_t rx = joint.front().size();
  std::vector<double> pt(rt, 0.0), px(rx, 0.0);
  for (std::size_t k = 0; k < rt; ++k)
    for (std::size_t i = 0; i < rx; ++i) {
      pt[k] += joint[k][i];
      px[i] += joint[k][i];
    }
  double total_var = 0.0;
  for (double p : pt) total_var += p * (1.0 - p);
  if (!(total_var > 0.0)) throw NumericalError("target " + target + " has zero variance");
  double explained = 0.0;
  for (std::size_t i = 0; i < rx; ++i) {
    if (!(px[i] > 0.0)) continue;
    for (std::size_t k = 0; k < rt; ++k) {
      const double d = joint[k][i] / px[i] - pt[k];
      explained += px[i] * d * d;
    }
  }
  return std::clamp(explained / total_var, 0.0, 1.0);
}

double arc_diameter(const BayesianNetwork& net, const std::string& parent, const std::string& child,
                    bool whole_row) {
  const auto c = net.index(child);
  const auto& cpt = net.cpt(c);
  auto it = std::find(cpt.parents.begin(), cpt.parents.end(), parent);
  if (it == cpt.parents.end()) throw InputError("no edge " + parent + "->" + child);
  const auto pos = static_cast<std::size_t>(it - cpt.parents.begin());

  double best = 0.0;
  if (whole_row) {
    for (std::size_t a = 0; a < cpt.rows.size(); ++a)
      for (std::size_t b = a + 1; b < cpt.rows.size(); ++b) best = std::max(best, total_variation(cpt.rows[a], cpt.rows[b]));
    return best;
  }
  for (std::size_t config = 0; config < cpt.rows.size(); ++config) {
    auto states = cpt.config_states(config);
    if (states[pos] != 0) continue;  // visit each co-parent configuration once
    for (std::size_t a = 0; a < cpt.parent_cards[pos]; ++a)
      for (std::size_t b = a + 1; b < cpt.parent_cards[pos]; ++b) {
        states[pos] = a;
        const auto& ra = cpt.rows[cpt.config_index(states)];
        states[pos] = b;
        const auto& rb = cpt.rows[cpt.config_index(states)];
        best = std::max(best, total_variation(ra, rb));
      }
  }
  return best;
}

std::vector<int> competition_ranks(const std::vector<double>& values) {
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int greater = 0;
    for (double v : values)
      if (v > values[i] + 1e-12) ++greater;
    ranks[i] = greater + 1;
  }
  return ranks;
}

SensitivityReport sensitivity_report(const BayesianNetwork& net, const std::string& target, bool whole_row_diameter) {
  const auto t = net.index(target);
  SensitivityReport report;
  report.target = target;
  std::vector<double> mi, sobol;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i == t) continue;
    NodeSensitivity ns;
    ns.node = net.name(i);
    ns.mutual_information = mutual_information(net, target, ns.node);
    ns.sobol = sobol_index(net, target, ns.node);
    mi.push_back(ns.mutual_information);
    sobol.push_back(ns.sobol);
    report.nodes.push_back(std::move(ns));
  }
  const auto mi_ranks = competition_ranks(mi);
  const auto sobol_ranks = competition_ranks(sobol);
  for (std::size_t k = 0; k < report.nodes.size(); ++k) {
    report.nodes[k].mi_rank = mi_ranks[k];
    report.nodes[k].sobol_rank = sobol_ranks[k];
  }
  std::stable_sort(report.nodes.begin(), report.nodes.end(),
                   [](const NodeSensitivity& a, const NodeSensitivity& b) { return a.sobol_rank < b.sobol_rank; });

  std::vector<double> diam;
  for (auto [p, c] : net.dag().edges()) {
    EdgeStrength e{net.name(p), net.name(c), 0.0, 0};
    e.diameter = arc_diameter(net, e.parent, e.child, whole_row_diameter);
    diam.push_back(e.diameter);
    report.edges.push_back(std::move(e));
  }
  const auto d_ranks = competition_ranks(diam);
  for (std::size_t k = 0; k < report.edges.size(); ++k) report.edges[k].rank = d_ranks[k];
  std::stable_sort(report.edges.begin(), report.edges.end(),
                   [](const EdgeStrength& a, const EdgeStrength& b) { return a.rank < b.rank; });
  return report;
}

Cpt covary(const Cpt& cpt, std::size_t config, std::size_t state, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw InputError("perturbed probability must lie in [0, 1]");
  Cpt out = cpt;
  auto& row = out.rows.at(config);
  const double old = row.at(state);
  const double rest = 1.0 - old;
  const std::size_t r = row.size();
  for (std::size_t l = 0; l < r; ++l) {
    if (l == state) continue;
    row[l] = rest > 0.0 ? row[l] * (1.0 - value) / rest : (1.0 - value) / static_cast<double>(r - 1);
  }
  row[state] = value;
  return out;
}

std::vector<TornadoEntry> tornado(const BayesianNetwork& net, const std::string& target,
                                  const std::string& target_state, const TornadoOptions& options) {
  if (options.top_k < 1) throw InputError("top_k must be at least 1");
  if (!(options.delta > 0.0 && options.delta <= 1.0)) throw InputError("perturbation step must lie in (0, 1]");
  const auto t = net.index(target);
  const auto ts = net.state_index(t, target_state);
  auto output = [&](const BayesianNetwork& m) { return posterior(m, target, {}).distribution[ts]; };
  const double baseline = output(net);

  std::vector<TornadoEntry> entries;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& cpt = net.cpt(i);
    if (cpt.cardinality() < 2) continue;
    // Only ancestors of the target (and the target itself) can move its marginal.
    const bool relevant = is_ancestor_or_self(net.dag(), i, t);
    for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
      std::string label;
      const auto ps = cpt.config_states(j);
      for (std::size_t k = 0; k < ps.size(); ++k)
        label += (k ? "," : "") + cpt.parents[k] + "=" + net.states(net.cpt_parent_indices(i)[k])[ps[k]];
      for (std::size_t s = 0; s < cpt.cardinality(); ++s) {
        TornadoEntry e;
        e.node = cpt.node;
        e.configuration = j;
        e.parent_states = label;
        e.state = cpt.states[s];
        e.theta = cpt.rows[j][s];
        e.baseline_output = baseline;
        if (relevant) {
          const double step = std::min({options.delta, e.theta, 1.0 - e.theta});
          auto at = [&](double v) { return output(net.with_cpt(i, covary(cpt, j, s, v))); };
          if (step > 0.0) {
            e.sensitivity_value = (at(e.theta + step) - at(e.theta - step)) / (2.0 * step);
          } else if (e.theta <= 0.0) {
            e.one_sided = true;
            e.sensitivity_value = (at(options.delta) - at(0.0)) / options.delta;
          } else {
            e.one_sided = true;
            e.sensitivity_value = (at(1.0) - at(1.0 - options.delta)) / options.delta;
          }
        }
        e.direction = (e.sensitivity_value > 0.0) - (e.sensitivity_value < 0.0);
        entries.push_back(std::move(e));
      }
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const TornadoEntry& a, const TornadoEntry& b) {
    return std::abs(a.sensitivity_value) > std::abs(b.sensitivity_value);
  });
  if (entries.size() > options.top_k) entries.resize(options.top_k);
  return entries;
}

}  // namespace carbonbn
