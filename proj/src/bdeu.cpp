#include "carbonbn/bdeu.hpp"

#include <cmath>

#include "carbonbn/errors.hpp"

namespace carbonbn {

void BDeuConfig::validate() const {
  if (!(ess > 0.0) || !std::isfinite(ess)) throw InputError("equivalent sample size must be positive");
}

FamilyCounts count_families(const DiscretePanel& data, std::size_t node, std::span<const std::size_t> parents) {
  FamilyCounts out;
  out.node = data.names.at(node);
  out.arity = data.arity(node);
  std::size_t q = 1;
  for (auto p : parents) {
    out.parents.push_back(data.names.at(p));
    out.parent_cards.push_back(data.arity(p));
    q *= data.arity(p);
  }
  out.counts.assign(q * out.arity, 0);
  out.marginals.assign(q, 0);
  const auto& child = data.codes[node];
  const std::size_t n = data.rows();
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) j = j * out.parent_cards[k] + data.codes[parents[k]][r];
    ++out.counts[j * out.arity + child[r]];
    ++out.marginals[j];
  }
  return out;
}

FamilyCounts count_families(const DiscretePanel& data, std::string_view node, std::span<const std::string> parents) {
  std::vector<std::size_t> idx;
  for (const auto& p : parents) idx.push_back(data.column_index(p));
  return count_families(data, data.column_index(node), idx);
}

double bdeu_family_score(const FamilyCounts& counts, const BDeuConfig& config) {
  config.validate();
  const double q = static_cast<double>(counts.configurations());
  const double r = static_cast<double>(counts.arity);
  const double a_j = config.ess / q;
  const double a_jk = config.ess / (q * r);
  const double lg_aj = std::lgamma(a_j);
  const double lg_ajk = std::lgamma(a_jk);
  double score = 0.0;
  for (std::size_t j = 0; j < counts.configurations(); ++j) {
    if (counts.marginals[j] == 0) continue;  // all terms cancel
    score += lg_aj - std::lgamma(static_cast<double>(counts.marginals[j]) + a_j);
    for (std::size_t k = 0; k < counts.arity; ++k) {
      const auto n = counts.at(j, k);
      if (n != 0) score += std::lgamma(static_cast<double>(n) + a_jk) - lg_ajk;
    }
  }
  return score;
}

double bdeu_score(const Dag& dag, const DiscretePanel& data, const BDeuConfig& config) {
  double total = 0.0;  // log P(G) = 0 under the uniform prior
  for (std::size_t i = 0; i < dag.size(); ++i) {
    std::vector<std::size_t> parents;
    for (auto p : dag.parents(i)) parents.push_back(data.column_index(dag.nodes()[p]));
    total += bdeu_family_score(count_families(data, data.column_index(dag.nodes()[i]), parents), config);
  }
  return total;
}

}  // namespace carbonbn
