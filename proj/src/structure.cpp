#include "carbonbn/structure.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <tuple>
#include <deque>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <unordered_map>

#include "carbonbn/errors.hpp"

namespace carbonbn {

namespace {

constexpr double kMinGain = 1e-10;

enum class MoveKind { add, remove, reverse };

struct Move {
  MoveKind kind;
  std::size_t from, to;  // the edge acted on: add from->to, remove from->to, reverse from->to
  friend bool operator==(const Move&, const Move&) = default;
};

Move inverse(const Move& m) {
  switch (m.kind) {
    case MoveKind::add: return {MoveKind::remove, m.from, m.to};
    case MoveKind::remove: return {MoveKind::add, m.from, m.to};
    case MoveKind::reverse: return {MoveKind::reverse, m.to, m.from};
  }
  return m;
}

std::uint64_t mask_of(const std::vector<std::size_t>& parents) {
  std::uint64_t m = 0;
  for (auto p : parents) m |= std::uint64_t{1} << p;
  return m;
}

// Family scores keyed by (child, parent bitmask); parents are counted in ascending order.
class ScoreCache {
 public:
  ScoreCache(const DiscretePanel& data, const BDeuConfig& config) : data_(data), config_(config) {}

  double family(std::size_t child, std::uint64_t mask) {
    const auto key = std::make_pair(child, mask);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<std::size_t> parents;
    for (std::size_t p = 0; p < 64; ++p)
      if (mask >> p & 1) parents.push_back(p);
    const double s = bdeu_family_score(count_families(data_, child, parents), config_);
    cache_.emplace(key, s);
    return s;
  }

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<std::size_t, std::uint64_t>& k) const {
      return std::hash<std::uint64_t>{}(k.second * 0x9E3779B97F4A7C15ull ^ k.first);
    }
  };
  const DiscretePanel& data_;
  BDeuConfig config_;
  std::unordered_map<std::pair<std::size_t, std::uint64_t>, double, KeyHash> cache_;
};

class Searcher {
 public:
  Searcher(const DiscretePanel& data, const BDeuConfig& config, const SearchControls& controls, std::uint64_t seed)
      : controls_(controls), cache_(data, config), dag_(data.names), order_(data.cols()) {
    std::iota(order_.begin(), order_.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }

  double family_score(std::size_t node) { return cache_.family(node, mask_of(dag_.parents(node))); }

  double total_score() {
    double s = 0.0;
    for (std::size_t i = 0; i < dag_.size(); ++i) s += family_score(i);
    return s;
  }

  // Score change of a move, ignoring acyclicity; nullopt if structurally illegal.
  std::optional<double> delta(const Move& m) {
    const auto in_limit = static_cast<std::size_t>(controls_.max_in_degree);
    switch (m.kind) {
      case MoveKind::add: {
        if (dag_.adjacent(m.from, m.to) || !controls_.constraints.allowed(m.from, m.to)) return std::nullopt;
        if (dag_.parents(m.to).size() >= in_limit) return std::nullopt;
        const auto base = mask_of(dag_.parents(m.to));
        return cache_.family(m.to, base | std::uint64_t{1} << m.from) - cache_.family(m.to, base);
      }
      case MoveKind::remove: {
        if (!dag_.has_edge(m.from, m.to)) return std::nullopt;
        const auto base = mask_of(dag_.parents(m.to));
        return cache_.family(m.to, base & ~(std::uint64_t{1} << m.from)) - cache_.family(m.to, base);
      }
      case MoveKind::reverse: {
        if (!dag_.has_edge(m.from, m.to) || !controls_.constraints.allowed(m.to, m.from)) return std::nullopt;
        if (dag_.parents(m.from).size() >= in_limit) return std::nullopt;
        const auto child_mask = mask_of(dag_.parents(m.to));
        const auto parent_mask = mask_of(dag_.parents(m.from));
        return cache_.family(m.to, child_mask & ~(std::uint64_t{1} << m.from)) - cache_.family(m.to, child_mask) +
               cache_.family(m.from, parent_mask | std::uint64_t{1} << m.to) - cache_.family(m.from, parent_mask);
      }
    }
    return std::nullopt;
  }

  bool acyclic_after(const Move& m) const {
    switch (m.kind) {
      case MoveKind::add: return !dag_.creates_cycle(m.from, m.to);
      case MoveKind::remove: return true;
      case MoveKind::reverse: return !dag_.reversal_creates_cycle(m.from, m.to);
    }
    return false;
  }

  void apply(const Move& m) {
    switch (m.kind) {
      case MoveKind::add: dag_.add_edge(m.from, m.to); break;
      case MoveKind::remove: dag_.remove_edge(m.from, m.to); break;
      case MoveKind::reverse: dag_.reverse_edge(m.from, m.to); break;
    }
  }

  // Best legal move in seeded enumeration order; earlier moves win exact ties.
  template <class Admissible>
  std::optional<std::pair<Move, double>> best_move(Admissible&& admissible) {
    std::optional<std::pair<Move, double>> best;
    auto consider = [&](const Move& m) {
      auto d = delta(m);
      if (!d || !admissible(m, *d)) return;
      if (best && *d <= best->second + kMinGain) return;
      if (acyclic_after(m)) best = std::make_pair(m, *d);
    };
    for (auto a : order_)
      for (auto b : order_) {
        if (a == b) continue;
        if (dag_.has_edge(a, b)) {
          consider({MoveKind::remove, a, b});
          consider({MoveKind::reverse, a, b});
        } else if (!dag_.has_edge(b, a)) {
          consider({MoveKind::add, a, b});
        }
      }
    return best;
  }

  Dag run() {
    double current = total_score();
    Dag best_dag = dag_;
    double best_score = current;
    std::deque<Move> tabu;
    int stale = 0;
    for (int iter = 0; iter < controls_.max_iterations && stale < controls_.max_no_improve; ++iter) {
      auto chosen = best_move([&](const Move& m, double d) {
        const bool is_tabu = std::find(tabu.begin(), tabu.end(), m) != tabu.end();
        return !is_tabu || current + d > best_score + kMinGain;  // aspiration
      });
      if (!chosen) break;
      apply(chosen->first);
      current += chosen->second;
      tabu.push_back(inverse(chosen->first));
      while (tabu.size() > static_cast<std::size_t>(std::max(controls_.tabu_tenure, 0))) tabu.pop_front();
      if (current > best_score + kMinGain) {
        best_score = current;
        best_dag = dag_;
        stale = 0;
      } else {
        ++stale;
      }
    }
    // Greedy ascent from the best graph visited.
    dag_ = std::move(best_dag);
    while (auto step = best_move([](const Move&, double d) { return d > kMinGain; })) apply(step->first);
    return dag_;
  }

 private:
  SearchControls controls_;
  ScoreCache cache_;
  Dag dag_;
  std::vector<std::size_t> order_;
};

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // splitmix64 over a combined state
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1) + 0xBF58476D1CE4E5B9ull * (index + 1);
  for (int i = 0; i < 2; ++i) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
  }
  return z;
}

Dag tabu_search(const DiscretePanel& data, const BDeuConfig& config, const SearchControls& controls,
                std::uint64_t seed) {
  data.validate();
  config.validate();
  if (data.rows() == 0) throw InputError("tabu_search needs a non-empty panel");
  if (data.cols() > 64) throw InputError("tabu_search supports at most 64 variables");
  if (controls.max_in_degree < 0) throw InputError("max in-degree must be non-negative");
  return Searcher(data, config, controls, seed).run();
}

DiscretePanel bootstrap_resample(const DiscretePanel& data, std::uint64_t seed, std::size_t index) {
  const std::size_t n = data.rows();
  if (n == 0) throw InputError("cannot resample an empty panel");
  std::mt19937_64 rng(derive_seed(seed, kResampleStream, index));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = pick(rng);
  DiscretePanel out;
  out.names = data.names;
  out.states = data.states;
  out.codes.resize(data.cols());
  for (std::size_t c = 0; c < data.cols(); ++c) {
    out.codes[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) out.codes[c][i] = data.codes[c][rows[i]];
  }
  return out;
}

Dag consensus_graph(const std::vector<std::string>& nodes, const std::vector<EdgeFrequency>& frequencies,
                    double threshold, ThresholdMode mode) {
  constexpr double eps = 1e-12;
  struct Candidate {
    std::size_t from, to;
    const EdgeFrequency* freq;
    double directed() const { return from == freq->a ? freq->forward : freq->backward; }
  };
  std::vector<Candidate> kept;
  for (const auto& f : frequencies) {
    const bool forward_major = f.forward >= f.backward;  // ties orient lower index first
    if (mode == ThresholdMode::undirected) {
      if (f.undirected + eps < threshold) continue;
      kept.push_back(forward_major ? Candidate{f.a, f.b, &f} : Candidate{f.b, f.a, &f});
    } else {
      const bool fwd = f.forward + eps >= threshold;
      const bool bwd = f.backward + eps >= threshold;
      if (fwd && (!bwd || forward_major)) kept.push_back({f.a, f.b, &f});
      else if (bwd) kept.push_back({f.b, f.a, &f});
    }
  }

  const std::size_t n = nodes.size();
  auto find_cycle = [&](const std::vector<Candidate>& edges) -> std::vector<std::size_t> {
    // Returns indices into `edges` forming a directed cycle, or empty.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> out(n);
    for (std::size_t e = 0; e < edges.size(); ++e) out[edges[e].from].emplace_back(edges[e].to, e);
    std::vector<int> color(n, 0);
    std::vector<std::size_t> via(n, 0), parent(n, n);
    for (std::size_t root = 0; root < n; ++root) {
      if (color[root]) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
      color[root] = 1;
      while (!stack.empty()) {
        auto& [v, next] = stack.back();
        if (next == out[v].size()) {
          color[v] = 2;
          stack.pop_back();
          continue;
        }
        auto [w, e] = out[v][next++];
        if (color[w] == 1) {
          std::vector<std::size_t> cycle{e};
          for (std::size_t u = v; u != w; u = parent[u]) cycle.push_back(via[u]);
          return cycle;
        }
        if (color[w] == 0) {
          color[w] = 1;
          parent[w] = v;
          via[w] = e;
          stack.emplace_back(w, 0);
        }
      }
    }
    return {};
  };

  for (auto cycle = find_cycle(kept); !cycle.empty(); cycle = find_cycle(kept)) {
    auto weakest = *std::min_element(cycle.begin(), cycle.end(), [&](std::size_t x, std::size_t y) {
      const auto& ex = kept[x];
      const auto& ey = kept[y];
      if (ex.freq->undirected != ey.freq->undirected) return ex.freq->undirected < ey.freq->undirected;
      if (ex.directed() != ey.directed()) return ex.directed() < ey.directed();
      return std::tie(ex.from, ex.to) > std::tie(ey.from, ey.to);
    });
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(weakest));
  }

  Dag dag(nodes);
  for (const auto& c : kept) dag.add_edge(c.from, c.to);
  return dag;
}

ConsensusResult bootstrap_consensus(const DiscretePanel& data, const BDeuConfig& config,
                                    const SearchControls& controls, const BootstrapOptions& options,
                                    std::uint64_t seed) {
  if (options.resamples < 1) throw InputError("resamples must be at least 1");
  if (!(options.threshold > 0.0 && options.threshold <= 1.0)) throw InputError("threshold must lie in (0, 1]");
  data.validate();
  const auto B = static_cast<std::size_t>(options.resamples);
  std::vector<Dag> graphs(B);

  unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, B));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t b = next++; b < B; b = next++) {
      try {
        graphs[b] = tabu_search(bootstrap_resample(data, seed, b), config, controls,
                                derive_seed(seed, kSearchStream, b));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  const std::size_t n = data.cols();
  std::vector<std::size_t> fwd(n * n, 0);
  for (const auto& g : graphs)
    for (auto [a, b] : g.edges()) ++fwd[a * n + b];

  ConsensusResult result;
  const double denom = static_cast<double>(B);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto f = fwd[a * n + b];
      const auto r = fwd[b * n + a];
      if (f + r == 0) continue;
      result.frequencies.push_back({a, b, static_cast<double>(f + r) / denom, static_cast<double>(f) / denom,
                                    static_cast<double>(r) / denom});
    }
  result.dag = consensus_graph(data.names, result.frequencies, options.threshold, options.mode);
  return result;
}

}  // namespace carbonbn
