#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace carbonbn {

using Edge = std::pair<std::size_t, std::size_t>;  // (parent, child)

/// Directed acyclic graph over named nodes. Mutators reject self-loops,
/// duplicate edges and cycles.
class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> nodes);

  const std::vector<std::string>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t index(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool has_edge(std::size_t parent, std::size_t child) const { return adj_[parent][child] != 0; }
  bool adjacent(std::size_t a, std::size_t b) const { return has_edge(a, b) || has_edge(b, a); }
  void add_edge(std::size_t parent, std::size_t child);
  void add_edge(std::string_view parent, std::string_view child);
  void remove_edge(std::size_t parent, std::size_t child);
  void reverse_edge(std::size_t parent, std::size_t child);

  /// True if adding parent->child would close a directed cycle.
  bool creates_cycle(std::size_t parent, std::size_t child) const;
  /// True if reversing parent->child would close a directed cycle.
  bool reversal_creates_cycle(std::size_t parent, std::size_t child) const;
  bool has_path(std::size_t from, std::size_t to) const;

  /// Parents in ascending index order.
  const std::vector<std::size_t>& parents(std::size_t node) const { return parents_[node]; }
  std::vector<std::size_t> children(std::size_t node) const;
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;
  std::vector<std::size_t> topological_order() const;

  friend bool operator==(const Dag& a, const Dag& b) { return a.nodes_ == b.nodes_ && a.adj_ == b.adj_; }

 private:
  std::vector<std::string> nodes_;
  std::vector<std::vector<char>> adj_;
  std::vector<std::vector<std::size_t>> parents_;
};

/// Partially directed graph; undirected edges are stored with first < second.
struct Pdag {
  std::vector<std::string> nodes;
  std::vector<Edge> directed;
  std::vector<Edge> undirected;

  bool is_directed(std::size_t a, std::size_t b) const;
  bool is_undirected(std::size_t a, std::size_t b) const;
  friend bool operator==(const Pdag&, const Pdag&) = default;
};

/// Completed PDAG of the Markov equivalence class: compelled edges directed,
/// reversible edges undirected.
Pdag cpdag(const Dag& dag);

}  // namespace carbonbn
