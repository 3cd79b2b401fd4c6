#include "carbonbn/dag.hpp"

#include <algorithm>
#include <set>

#include "carbonbn/errors.hpp"

namespace carbonbn {

Dag::Dag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
  auto sorted = nodes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw InputError("duplicate node names");
  adj_.assign(nodes_.size(), std::vector<char>(nodes_.size(), 0));
  parents_.resize(nodes_.size());
}

std::size_t Dag::index(std::string_view name) const {
  auto it = std::find(nodes_.begin(), nodes_.end(), name);
  if (it == nodes_.end()) throw InputError("unknown node '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - nodes_.begin());
}

bool Dag::contains(std::string_view name) const {
  return std::find(nodes_.begin(), nodes_.end(), name) != nodes_.end();
}

void Dag::add_edge(std::size_t parent, std::size_t child) {
  if (parent >= size() || child >= size()) throw InputError("edge endpoint out of range");
  if (parent == child) throw InputError("self-loop on " + nodes_[parent]);
  if (has_edge(parent, child)) throw InputError("duplicate edge " + nodes_[parent] + "->" + nodes_[child]);
  if (creates_cycle(parent, child)) throw InputError("edge " + nodes_[parent] + "->" + nodes_[child] + " closes a cycle");
  adj_[parent][child] = 1;
  auto& ps = parents_[child];
  ps.insert(std::upper_bound(ps.begin(), ps.end(), parent), parent);
}

void Dag::add_edge(std::string_view parent, std::string_view child) { add_edge(index(parent), index(child)); }

void Dag::remove_edge(std::size_t parent, std::size_t child) {
  if (!has_edge(parent, child)) throw InputError("no edge " + nodes_[parent] + "->" + nodes_[child]);
  adj_[parent][child] = 0;
  auto& ps = parents_[child];
  ps.erase(std::find(ps.begin(), ps.end(), parent));
}

void Dag::reverse_edge(std::size_t parent, std::size_t child) {
  if (reversal_creates_cycle(parent, child))
    throw InputError("reversing " + nodes_[parent] + "->" + nodes_[child] + " closes a cycle");
  remove_edge(parent, child);
  add_edge(child, parent);
}

bool Dag::has_path(std::size_t from, std::size_t to) const {
  if (from == to) return true;
  std::vector<char> seen(size(), 0);
  std::vector<std::size_t> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (std::size_t w = 0; w < size(); ++w) {
      if (!adj_[v][w] || seen[w]) continue;
      if (w == to) return true;
      seen[w] = 1;
      stack.push_back(w);
    }
  }
  return false;
}

bool Dag::creates_cycle(std::size_t parent, std::size_t child) const { return has_path(child, parent); }

bool Dag::reversal_creates_cycle(std::size_t parent, std::size_t child) const {
  // After removing parent->child, adding child->parent cycles iff another path parent ~> child exists.
  std::vector<char> seen(size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t w = 0; w < size(); ++w)
    if (adj_[parent][w] && w != child) {
      seen[w] = 1;
      stack.push_back(w);
    }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    if (v == child) return true;
    for (std::size_t w = 0; w < size(); ++w)
      if (adj_[v][w] && !seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
  }
  return false;
}

std::vector<std::size_t> Dag::children(std::size_t node) const {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < size(); ++w)
    if (adj_[node][w]) out.push_back(w);
  return out;
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (std::size_t a = 0; a < size(); ++a)
    for (std::size_t b = 0; b < size(); ++b)
      if (adj_[a][b]) out.emplace_back(a, b);
  return out;
}

std::size_t Dag::edge_count() const {
  std::size_t n = 0;
  for (const auto& ps : parents_) n += ps.size();
  return n;
}

std::vector<std::size_t> Dag::topological_order() const {
  std::vector<std::size_t> indegree(size());
  for (std::size_t v = 0; v < size(); ++v) indegree[v] = parents_[v].size();
  std::vector<std::size_t> order;
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < size(); ++v)
    if (indegree[v] == 0) ready.insert(v);
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (std::size_t w = 0; w < size(); ++w)
      if (adj_[v][w] && --indegree[w] == 0) ready.insert(w);
  }
  return order;
}

bool Pdag::is_directed(std::size_t a, std::size_t b) const {
  return std::find(directed.begin(), directed.end(), Edge{a, b}) != directed.end();
}

bool Pdag::is_undirected(std::size_t a, std::size_t b) const {
  return std::find(undirected.begin(), undirected.end(), Edge{std::min(a, b), std::max(a, b)}) != undirected.end();
}

Pdag cpdag(const Dag& dag) {
  const std::size_t n = dag.size();
  // state[a][b]: 1 = a->b directed, 2 = undirected (symmetric), 0 = none
  std::vector<std::vector<int>> state(n, std::vector<int>(n, 0));
  for (auto [a, b] : dag.edges()) state[a][b] = state[b][a] = 2;

  // v-structures a->c<-b with a, b non-adjacent
  for (std::size_t c = 0; c < n; ++c) {
    const auto& ps = dag.parents(c);
    for (std::size_t i = 0; i < ps.size(); ++i)
      for (std::size_t j = i + 1; j < ps.size(); ++j)
        if (!dag.adjacent(ps[i], ps[j])) {
          state[ps[i]][c] = 1, state[c][ps[i]] = 0;
          state[ps[j]][c] = 1, state[c][ps[j]] = 0;
        }
  }

  auto undirected = [&](std::size_t a, std::size_t b) { return state[a][b] == 2; };
  auto directed = [&](std::size_t a, std::size_t b) { return state[a][b] == 1; };
  auto adjacent = [&](std::size_t a, std::size_t b) { return state[a][b] != 0 || state[b][a] != 0; };
  auto orient = [&](std::size_t a, std::size_t b) { state[a][b] = 1, state[b][a] = 0; };

  // Meek rules 1-3 to closure.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (!undirected(a, b)) continue;
        bool compelled = false;
        for (std::size_t c = 0; c < n && !compelled; ++c) {
          // R1: c->a, a-b, c and b non-adjacent => a->b
          if (directed(c, a) && !adjacent(c, b)) compelled = true;
          // R2: a->c->b and a-b => a->b
          if (directed(a, c) && directed(c, b)) compelled = true;
        }
        // R3: a-c1, a-c2, c1->b, c2->b, c1 and c2 non-adjacent => a->b
        for (std::size_t c1 = 0; c1 < n && !compelled; ++c1) {
          if (!undirected(a, c1) || !directed(c1, b)) continue;
          for (std::size_t c2 = c1 + 1; c2 < n; ++c2)
            if (undirected(a, c2) && directed(c2, b) && !adjacent(c1, c2)) {
              compelled = true;
              break;
            }
        }
        if (compelled) {
          orient(a, b);
          changed = true;
        }
      }
  }

  Pdag out;
  out.nodes = dag.nodes();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      if (directed(a, b)) out.directed.emplace_back(a, b);
      if (a < b && undirected(a, b)) out.undirected.emplace_back(a, b);
    }
  return out;
}

}  // namespace carbonbn
