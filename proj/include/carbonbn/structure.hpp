#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "carbonbn/bdeu.hpp"
#include "carbonbn/dag.hpp"
#include "carbonbn/discrete.hpp"

namespace carbonbn {

/// Which directed edges the search may introduce. Default: all.
class EdgeConstraints {
 public:
  EdgeConstraints() = default;
  explicit EdgeConstraints(std::size_t nodes, bool allow_all = true)
      : n_(nodes), allowed_(nodes * nodes, allow_all ? 1 : 0) {}

  bool empty() const { return n_ == 0; }
  bool allowed(std::size_t parent, std::size_t child) const { return n_ == 0 || allowed_[parent * n_ + child]; }
  void set(std::size_t parent, std::size_t child, bool allow) { allowed_[parent * n_ + child] = allow ? 1 : 0; }

 private:
  std::size_t n_ = 0;
  std::vector<char> allowed_;
};

struct SearchControls {
  int tabu_tenure = 10;
  int max_no_improve = 15;
  int max_in_degree = 4;
  int max_iterations = 100000;
  EdgeConstraints constraints;
};

/// Tabu search over add/delete/reverse moves scored by BDeu, starting from the
/// empty graph, followed by a greedy pass so the result is a local optimum.
/// Nodes are the panel columns in panel order; `seed` fixes move enumeration order.
Dag tabu_search(const DiscretePanel& data, const BDeuConfig& config, const SearchControls& controls,
                std::uint64_t seed);

enum class ThresholdMode { undirected, directed };

struct BootstrapOptions {
  int resamples = 200;
  double threshold = 0.5;
  ThresholdMode mode = ThresholdMode::undirected;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// How often a node pair was connected across resampled searches.
struct EdgeFrequency {
  std::size_t a = 0, b = 0;  // a < b
  double undirected = 0.0;
  double forward = 0.0;   // a -> b
  double backward = 0.0;  // b -> a
};

struct ConsensusResult {
  Dag dag;
  std::vector<EdgeFrequency> frequencies;  // every pair seen at least once, sorted by (a, b)
};

ConsensusResult bootstrap_consensus(const DiscretePanel& data, const BDeuConfig& config,
                                    const SearchControls& controls, const BootstrapOptions& options,
                                    std::uint64_t seed);

/// Keeps pairs meeting the threshold, orients each in its majority direction
/// (ties: lower index first) and then drops the weakest edge of each remaining cycle.
Dag consensus_graph(const std::vector<std::string>& nodes, const std::vector<EdgeFrequency>& frequencies,
                    double threshold, ThresholdMode mode);

/// Row resample with replacement for bootstrap replicate `index`.
DiscretePanel bootstrap_resample(const DiscretePanel& data, std::uint64_t seed, std::size_t index);

/// Independent 64-bit sub-seed for (seed, stream, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

inline constexpr std::uint64_t kResampleStream = 1;
inline constexpr std::uint64_t kSearchStream = 2;

}  // namespace carbonbn
