#include "carbonbn/inference.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "carbonbn/errors.hpp"

namespace carbonbn {

namespace {

constexpr double kMpeTieTolerance = 1e-9;

// Nodes that can influence the query: ancestors of query and evidence nodes.
std::vector<char> relevant_nodes(const BayesianNetwork& net, const std::vector<std::size_t>& query,
                                 const IndexedEvidence& evidence) {
  std::vector<char> keep(net.size(), 0);
  std::vector<std::size_t> stack(query.begin(), query.end());
  for (std::size_t i = 0; i < net.size(); ++i)
    if (evidence[i]) stack.push_back(i);
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (keep[v]) continue;
    keep[v] = 1;
    for (auto p : net.dag().parents(v)) stack.push_back(p);
  }
  return keep;
}

std::vector<Factor> reduced_factors(const BayesianNetwork& net, const std::vector<char>& keep,
                                    const IndexedEvidence& evidence) {
  std::vector<Factor> factors;
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (!keep[i]) continue;
    Factor f = Factor::from_cpt(net, i);
    for (auto v : std::vector<std::size_t>(f.vars()))
      if (evidence[v]) f = f.reduce(v, *evidence[v]);
    factors.push_back(std::move(f));
  }
  return factors;
}

std::vector<std::size_t> resolve_order(const std::vector<Factor>& factors, const std::vector<std::size_t>& to_eliminate,
                                       const InferenceOptions& options) {
  if (options.elimination_order.empty()) return min_fill_order(factors, to_eliminate);
  std::set<std::size_t> pending(to_eliminate.begin(), to_eliminate.end());
  std::vector<std::size_t> order;
  for (auto v : options.elimination_order)
    if (pending.erase(v)) order.push_back(v);
  auto rest = min_fill_order(factors, std::vector<std::size_t>(pending.begin(), pending.end()));
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

Factor eliminate(std::vector<Factor> factors, const std::vector<std::size_t>& order, bool use_max) {
  for (auto var : order) {
    Factor combined;
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.contains(var)) combined = combined.product(f);
      else rest.push_back(std::move(f));
    }
    rest.push_back(use_max ? combined.max_out(var) : combined.sum_out(var));
    factors = std::move(rest);
  }
  Factor result;
  for (const auto& f : factors) result = result.product(f);
  return result;
}

Factor unnormalized_query(const BayesianNetwork& net, const std::vector<std::size_t>& query,
                          const IndexedEvidence& evidence, const InferenceOptions& options) {
  const auto keep = relevant_nodes(net, query, evidence);
  auto factors = reduced_factors(net, keep, evidence);
  std::vector<std::size_t> to_eliminate;
  for (std::size_t i = 0; i < net.size(); ++i)
    if (keep[i] && !evidence[i] && std::find(query.begin(), query.end(), i) == query.end()) to_eliminate.push_back(i);
  const auto order = resolve_order(factors, to_eliminate, options);
  return eliminate(std::move(factors), order, false);
}

double max_product(const BayesianNetwork& net, const IndexedEvidence& evidence) {
  std::vector<char> all(net.size(), 1);
  auto factors = reduced_factors(net, all, evidence);
  std::vector<std::size_t> free_vars;
  for (std::size_t i = 0; i < net.size(); ++i)
    if (!evidence[i]) free_vars.push_back(i);
  const auto order = min_fill_order(factors, free_vars);
  return eliminate(std::move(factors), order, true).total();
}

std::string describe(const EvidenceMap& evidence) {
  std::string out;
  for (const auto& [k, v] : evidence) out += (out.empty() ? "" : ", ") + k + "=" + v;
  return out.empty() ? "{}" : out;
}

}  // namespace

IndexedEvidence resolve_evidence(const BayesianNetwork& net, const EvidenceMap& evidence) {
  IndexedEvidence out(net.size());
  for (const auto& [node, state] : evidence) {
    const auto i = net.index(node);
    out[i] = net.state_index(i, state);
  }
  return out;
}

std::vector<std::size_t> min_fill_order(const std::vector<Factor>& factors, std::vector<std::size_t> vars) {
  std::map<std::size_t, std::set<std::size_t>> nbrs;
  for (auto v : vars) nbrs[v];
  for (const auto& f : factors)
    for (auto a : f.vars())
      for (auto b : f.vars())
        if (a != b) nbrs[a].insert(b);
  std::vector<std::size_t> order;
  std::set<std::size_t> pending(vars.begin(), vars.end());
  while (!pending.empty()) {
    std::size_t best = *pending.begin();
    std::size_t best_fill = SIZE_MAX;
    for (auto v : pending) {
      const auto& nv = nbrs[v];
      std::size_t fill = 0;
      for (auto a = nv.begin(); a != nv.end(); ++a)
        for (auto b = std::next(a); b != nv.end(); ++b)
          if (!nbrs[*a].count(*b)) ++fill;
      if (fill < best_fill) best_fill = fill, best = v;
    }
    const auto nv = nbrs[best];
    for (auto a : nv) {
      for (auto b : nv)
        if (a != b) nbrs[a].insert(b);
      nbrs[a].erase(best);
    }
    nbrs.erase(best);
    pending.erase(best);
    order.push_back(best);
  }
  return order;
}

PosteriorReport posterior(const BayesianNetwork& net, const std::string& target, const EvidenceMap& evidence,
                          const InferenceOptions& options) {
  const auto t = net.index(target);
  const auto indexed = resolve_evidence(net, evidence);
  if (indexed[t]) throw InputError("target " + target + " is also observed");
  const Factor f = unnormalized_query(net, {t}, indexed, options);
  const double z = f.total();
  if (!(z > 0.0)) throw ZeroProbabilityEvidence("evidence " + describe(evidence) + " has zero probability");
  PosteriorReport report;
  report.target = target;
  report.states = net.states(t);
  report.evidence = evidence;
  report.distribution.resize(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) report.distribution[k] = f.values()[k] / z;
  return report;
}

Factor joint_marginal(const BayesianNetwork& net, const std::vector<std::size_t>& query,
                      const IndexedEvidence& evidence, const InferenceOptions& options) {
  for (auto q : query)
    if (evidence.at(q)) throw InputError("query variable " + net.name(q) + " is observed");
  const Factor f = unnormalized_query(net, query, evidence, options);
  if (!(f.total() > 0.0)) throw ZeroProbabilityEvidence("evidence has zero probability");
  return f.normalized();
}

double evidence_probability(const BayesianNetwork& net, const IndexedEvidence& evidence) {
  return unnormalized_query(net, {}, evidence, {}).total();
}

MpeResult mpe(const BayesianNetwork& net, const EvidenceMap& evidence) {
  auto decided = resolve_evidence(net, evidence);
  const double best = max_product(net, decided);
  if (!(best > 0.0)) throw ZeroProbabilityEvidence("evidence " + describe(evidence) + " has zero probability");
  // Fix nodes one at a time in node order, taking the first state that keeps the optimum reachable.
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (decided[i]) continue;
    for (std::size_t s = 0; s < net.cardinality(i); ++s) {
      decided[i] = s;
      if (max_product(net, decided) >= best * (1.0 - kMpeTieTolerance)) break;
      if (s + 1 == net.cardinality(i)) throw NumericalError("MPE traceback lost the optimum");
    }
  }
  MpeResult result;
  result.evidence = evidence;
  std::vector<std::size_t> full(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    full[i] = *decided[i];
    if (!evidence.count(net.name(i))) result.assignment[net.name(i)] = net.states(i)[full[i]];
  }
  result.log_probability = log_joint(net, full);
  result.log_evidence = std::log(evidence_probability(net, resolve_evidence(net, evidence)));
  return result;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw InputError("distributions differ in size");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

SweepTable evidence_sweep(const BayesianNetwork& net, const std::string& target, const SweepOptions& options) {
  if (net.size() < 2) throw InputError("evidence sweep needs at least two nodes");
  const auto t = net.index(target);
  SweepTable table;
  table.target = target;
  table.target_states = net.states(t);
  table.baseline = posterior(net, target, {}).distribution;

  for (std::size_t i = 0; i < net.size(); ++i) {
    if (i == t) continue;
    const auto& states = net.states(i);
    std::vector<std::string> chosen;
    if (!options.all_states) {
      for (const char* label : {"High", "Neutral", "Low"}) {
        if (std::string_view(label) == "Neutral" && !options.include_neutral) continue;
        if (std::find(states.begin(), states.end(), label) != states.end()) chosen.emplace_back(label);
      }
    }
    if (chosen.empty()) chosen = states;
    for (const auto& state : chosen) {
      try {
        auto report = posterior(net, target, {{net.name(i), state}});
        const double tvd = total_variation(report.distribution, table.baseline);
        table.rows.push_back({net.name(i), state, std::move(report.distribution), tvd});
      } catch (const ZeroProbabilityEvidence&) {
        continue;
      }
    }
  }
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.tvd > b.tvd; });
  return table;
}

}  // namespace carbonbn
