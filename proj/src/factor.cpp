#include "carbonbn/factor.hpp"

#include <algorithm>
#include <numeric>

#include "carbonbn/errors.hpp"
#include "carbonbn/network.hpp"

namespace carbonbn {

Factor::Factor(std::vector<std::size_t> vars, std::vector<std::size_t> cards, std::vector<double> values)
    : vars_(std::move(vars)), cards_(std::move(cards)), values_(std::move(values)) {
  if (vars_.size() != cards_.size()) throw InputError("factor variable/cardinality mismatch");
  if (!std::is_sorted(vars_.begin(), vars_.end()) ||
      std::adjacent_find(vars_.begin(), vars_.end()) != vars_.end())
    throw InputError("factor variables must be sorted and unique");
  const auto expected = std::accumulate(cards_.begin(), cards_.end(), std::size_t{1}, std::multiplies<>());
  if (values_.size() != expected) throw InputError("factor table has wrong size");
}

Factor Factor::from_cpt(const BayesianNetwork& net, std::size_t node) {
  const auto& cpt = net.cpt(node);
  const auto& parents = net.cpt_parent_indices(node);
  // CPT order: parents (as listed) then the child.
  std::vector<std::size_t> cpt_vars(parents.begin(), parents.end());
  cpt_vars.push_back(node);
  std::vector<std::size_t> cpt_cards(cpt.parent_cards.begin(), cpt.parent_cards.end());
  cpt_cards.push_back(cpt.cardinality());

  std::vector<std::size_t> order(cpt_vars.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cpt_vars[a] < cpt_vars[b]; });
  std::vector<std::size_t> vars, cards;
  for (auto o : order) {
    vars.push_back(cpt_vars[o]);
    cards.push_back(cpt_cards[o]);
  }
  std::vector<double> values(std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>()));
  std::vector<std::size_t> states(vars.size(), 0);
  std::vector<std::size_t> cpt_states(cpt_vars.size());
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    for (std::size_t k = 0; k < order.size(); ++k) cpt_states[order[k]] = states[k];
    const std::size_t config = cpt.config_index(std::span(cpt_states).first(parents.size()));
    values[idx] = cpt.rows[config][cpt_states.back()];
    for (std::size_t k = states.size(); k-- > 0;) {
      if (++states[k] < cards[k]) break;
      states[k] = 0;
    }
  }
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

bool Factor::contains(std::size_t var) const { return std::binary_search(vars_.begin(), vars_.end(), var); }

std::size_t Factor::cardinality(std::size_t var) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) throw InputError("variable not in factor");
  return cards_[static_cast<std::size_t>(it - vars_.begin())];
}

double Factor::at(std::span<const std::size_t> states) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < vars_.size(); ++k) idx = idx * cards_[k] + states[k];
  return values_[idx];
}

Factor Factor::product(const Factor& other) const {
  std::vector<std::size_t> vars;
  std::set_union(vars_.begin(), vars_.end(), other.vars_.begin(), other.vars_.end(), std::back_inserter(vars));
  std::vector<std::size_t> cards(vars.size());
  // Strides of each operand expressed over the union's variables.
  std::vector<std::size_t> stride_a(vars.size(), 0), stride_b(vars.size(), 0);
  auto fill_strides = [&](const Factor& f, std::vector<std::size_t>& stride) {
    std::size_t s = 1;
    for (std::size_t k = f.vars_.size(); k-- > 0;) {
      const auto pos = static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), f.vars_[k]) - vars.begin());
      stride[pos] = s;
      cards[pos] = f.cards_[k];
      s *= f.cards_[k];
    }
  };
  fill_strides(*this, stride_a);
  fill_strides(other, stride_b);
  const auto total = std::accumulate(cards.begin(), cards.end(), std::size_t{1}, std::multiplies<>());
  std::vector<double> values(total);
  std::vector<std::size_t> states(vars.size(), 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    values[idx] = values_[ia] * other.values_[ib];
    for (std::size_t k = vars.size(); k-- > 0;) {
      if (++states[k] < cards[k]) {
        ia += stride_a[k];
        ib += stride_b[k];
        break;
      }
      ia -= stride_a[k] * (cards[k] - 1);
      ib -= stride_b[k] * (cards[k] - 1);
      states[k] = 0;
    }
  }
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

Factor Factor::marginalize(std::size_t var, bool use_max) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) return *this;
  const auto pos = static_cast<std::size_t>(it - vars_.begin());
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < vars_.size(); ++k) inner *= cards_[k];
  const std::size_t card = cards_[pos];
  const std::size_t outer = values_.size() / (inner * card);
  std::vector<double> values(outer * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      double acc = values_[(o * card) * inner + i];
      for (std::size_t s = 1; s < card; ++s) {
        const double v = values_[(o * card + s) * inner + i];
        acc = use_max ? std::max(acc, v) : acc + v;
      }
      values[o * inner + i] = acc;
    }
  auto vars = vars_;
  auto cards = cards_;
  vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(pos));
  cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(pos));
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

Factor Factor::sum_out(std::size_t var) const { return marginalize(var, false); }
Factor Factor::max_out(std::size_t var) const { return marginalize(var, true); }

Factor Factor::reduce(std::size_t var, std::size_t state) const {
  auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
  if (it == vars_.end() || *it != var) return *this;
  const auto pos = static_cast<std::size_t>(it - vars_.begin());
  if (state >= cards_[pos]) throw InputError("evidence state out of range");
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < vars_.size(); ++k) inner *= cards_[k];
  const std::size_t card = cards_[pos];
  const std::size_t outer = values_.size() / (inner * card);
  std::vector<double> values(outer * inner);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) values[o * inner + i] = values_[(o * card + state) * inner + i];
  auto vars = vars_;
  auto cards = cards_;
  vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(pos));
  cards.erase(cards.begin() + static_cast<std::ptrdiff_t>(pos));
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

double Factor::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

Factor Factor::normalized() const {
  const double z = total();
  if (!(z > 0.0)) throw NumericalError("cannot normalize a zero factor");
  Factor out = *this;
  for (auto& v : out.values_) v /= z;
  return out;
}

}  // namespace carbonbn
