#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carbonbn/dag.hpp"
#include "carbonbn/discrete.hpp"

namespace carbonbn {

/// Contingency counts N_ijk for one family; configurations j are row-major
/// over the ordered parent list, k indexes child states.
struct FamilyCounts {
  std::string node;
  std::vector<std::string> parents;
  std::size_t arity = 0;                // r_i
  std::vector<std::size_t> parent_cards;
  std::vector<std::uint64_t> counts;    // q_i x r_i, row-major
  std::vector<std::uint64_t> marginals; // N_ij

  std::size_t configurations() const { return marginals.size(); }
  std::uint64_t at(std::size_t config, std::size_t state) const { return counts[config * arity + state]; }
};

struct BDeuConfig {
  double ess = 10.0;  // equivalent sample size N'
  void validate() const;
};

FamilyCounts count_families(const DiscretePanel& data, std::string_view node, std::span<const std::string> parents);

/// Index-based variant used by the search; parent columns in the given order.
FamilyCounts count_families(const DiscretePanel& data, std::size_t node, std::span<const std::size_t> parents);

/// Log marginal likelihood of one family under the BDeu prior.
double bdeu_family_score(const FamilyCounts& counts, const BDeuConfig& config);

/// Sum of family scores with a uniform structure prior. Nodes are matched to panel columns by name.
double bdeu_score(const Dag& dag, const DiscretePanel& data, const BDeuConfig& config);

}  // namespace carbonbn
