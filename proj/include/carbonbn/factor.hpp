#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace carbonbn {

class BayesianNetwork;

/// Non-negative table over a sorted set of variable indices. Values are
/// row-major: the first variable varies slowest.
class Factor {
 public:
  Factor() : values_{1.0} {}
  Factor(std::vector<std::size_t> vars, std::vector<std::size_t> cards, std::vector<double> values);

  /// The CPT of `node` as a factor over {node} and its parents.
  static Factor from_cpt(const BayesianNetwork& net, std::size_t node);

  const std::vector<std::size_t>& vars() const { return vars_; }
  const std::vector<std::size_t>& cards() const { return cards_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool contains(std::size_t var) const;
  std::size_t cardinality(std::size_t var) const;

  /// Value at a full assignment of this factor's variables (in vars() order).
  double at(std::span<const std::size_t> states) const;

  Factor product(const Factor& other) const;
  Factor sum_out(std::size_t var) const;
  Factor max_out(std::size_t var) const;
  /// Keeps only entries with var == state and drops var.
  Factor reduce(std::size_t var, std::size_t state) const;
  double total() const;
  Factor normalized() const;

 private:
  Factor marginalize(std::size_t var, bool use_max) const;

  std::vector<std::size_t> vars_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

}  // namespace carbonbn
