// Acceptance runner: one PASS / FAIL / SKIP line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"

#include "carbonbn/bdeu.hpp"
#include "carbonbn/dbn.hpp"
#include "carbonbn/discrete.hpp"
#include "carbonbn/errors.hpp"
#include "carbonbn/garch.hpp"
#include "carbonbn/inference.hpp"
#include "carbonbn/model_io.hpp"
#include "carbonbn/pipeline.hpp"
#include "carbonbn/sensitivity.hpp"
#include "carbonbn/structure.hpp"

using namespace carbonbn;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::fail, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return {ok ? Status::pass : Status::fail, std::move(d)}; }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

EvidenceMap to_map(const BayesianNetwork& net, const oracle::Evidence& e) {
  EvidenceMap m;
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i]) m[net.name(i)] = net.states(i)[*e[i]];
  return m;
}

oracle::Evidence random_evidence(const BayesianNetwork& net, std::mt19937_64& rng, double rate = 0.3) {
  oracle::Evidence e(net.size());
  std::bernoulli_distribution observe(rate);
  for (std::size_t i = 0; i < net.size(); ++i)
    if (observe(rng)) e[i] = rng() % net.cardinality(i);
  return e;
}

double evidence_mass(const BayesianNetwork& net, const oracle::Evidence& e) {
  double z = 0.0;
  oracle::for_each_assignment(net, [&](const std::vector<std::size_t>& x, double p) {
    if (oracle::consistent(x, e)) z += p;
  });
  return z;
}

// ---------------------------------------------------------------------------

Outcome ve_vs_enumeration() {
  std::mt19937_64 rng(1001);
  const auto t0 = Clock::now();
  double worst = 0.0;
  int queries = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + k % 7;
    const auto net = oracle::random_network(n, rng, 0.45, 3, 2 + rng() % 2);
    oracle::Evidence e;
    do e = random_evidence(net, rng); while (evidence_mass(net, e) == 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      if (e[t]) continue;
      const auto expect = oracle::posterior(net, t, e);
      const auto got = posterior(net, net.name(t), to_map(net, e)).distribution;
      for (std::size_t s = 0; s < expect.size(); ++s) worst = std::max(worst, std::abs(expect[s] - got[s]));
      ++queries;
    }
  }
  const double secs = seconds_since(t0);
  return verdict(worst <= 1e-10 && secs < 10.0,
                 "50 networks, " + std::to_string(queries) + " posteriors, max |diff| " + fmt(worst) + ", " +
                     fmt(secs) + " s");
}

Outcome mpe_vs_argmax() {
  std::mt19937_64 rng(1002);
  int agree = 0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 2 + k % 6;
    const auto net = oracle::random_network(n, rng, 0.45, 3, 2 + rng() % 2);
    oracle::Evidence e;
    do e = random_evidence(net, rng, 0.25); while (evidence_mass(net, e) == 0.0);
    const auto expect = oracle::mpe(net, e);
    const auto got = mpe(net, to_map(net, e));
    bool same = true;
    for (std::size_t i = 0; i < n; ++i)
      if (!e[i]) same = same && got.assignment.at(net.name(i)) == net.states(i)[expect[i]];
    agree += same;
  }
  return verdict(agree == 100, std::to_string(agree) + "/100 assignments identical");
}

Outcome bdeu_equivalence() {
  std::mt19937_64 rng(1003);
  std::size_t pairs = 0, class_mismatch = 0;
  double worst = 0.0;
  for (std::size_t n : {3u, 4u}) {
    const auto dags = oracle::all_dags(oracle::node_names(n), n - 1);
    for (int rep = 0; rep < 2; ++rep) {
      const auto truth = oracle::random_network(n, rng, 0.6, 3);
      const auto data = oracle::sample_panel(truth, 300, rng);
      std::vector<double> score(dags.size());
      std::vector<Pdag> classes(dags.size());
      std::vector<oracle::EquivalenceKey> keys(dags.size());
      for (std::size_t i = 0; i < dags.size(); ++i) {
        score[i] = bdeu_score(dags[i], data, {10.0});
        classes[i] = cpdag(dags[i]);
        keys[i] = oracle::equivalence_key(dags[i]);
      }
      for (std::size_t i = 0; i < dags.size(); ++i)
        for (std::size_t j = i + 1; j < dags.size(); ++j) {
          const bool same_cpdag = classes[i] == classes[j];
          // Two routes to equivalence must agree before the scores are compared.
          if (same_cpdag != (keys[i] == keys[j])) ++class_mismatch;
          if (!same_cpdag) continue;
          ++pairs;
          worst = std::max(worst, std::abs(score[i] - score[j]));
        }
    }
  }
  return verdict(worst <= 1e-9 && class_mismatch == 0 && pairs > 0,
                 std::to_string(pairs) + " equivalent pairs, max |diff| " + fmt(worst) + ", " +
                     std::to_string(class_mismatch) + " CPDAG/skeleton-collider disagreements");
}

BayesianNetwork recovery_truth() {
  // X0 -> X2 <- X1, X2 -> X3 -> X4: every edge compelled.
  Dag d(oracle::node_names(5));
  d.add_edge(0, 2);
  d.add_edge(1, 2);
  d.add_edge(2, 3);
  d.add_edge(3, 4);
  const std::vector<double> u{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const std::vector<std::vector<double>> copy{{0.7, 0.2, 0.1}, {0.15, 0.7, 0.15}, {0.1, 0.2, 0.7}};
  // Ordinal collider: each parent shifts X2 upward, so X0 and X1 are each marginally
  // informative about X2 while staying independent of one another.
  std::vector<std::vector<double>> mix;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      std::vector<double> row(3);
      double z = 0.0;
      for (int k = 0; k < 3; ++k) z += row[k] = std::exp(1.2 * (k - 1) * (a + b - 2));
      for (auto& v : row) v /= z;
      mix.push_back(row);
    }
  const auto& s = ternary_states();
  return BayesianNetwork(d, {{"X0", s, {}, {}, {u}},
                             {"X1", s, {}, {}, {u}},
                             {"X2", s, {"X0", "X1"}, {3, 3}, mix},
                             {"X3", s, {"X2"}, {3}, copy},
                             {"X4", s, {"X3"}, {3}, copy}});
}

Outcome structure_recovery() {
  const auto truth = recovery_truth();
  std::mt19937_64 rng(1004);
  const auto data = oracle::sample_panel(truth, 20000, rng);

  // Exhaustive optimum over in-degree <= 2 with independently computed family terms.
  std::map<std::pair<std::size_t, std::uint32_t>, double> family;
  auto family_score = [&](const Dag& g, std::size_t i) {
    std::uint32_t mask = 0;
    for (auto p : g.parents(i)) mask |= 1u << p;
    auto [it, fresh] = family.try_emplace({i, mask}, 0.0);
    if (fresh) it->second = oracle::bdeu_family(data, i, g.parents(i), 10.0);
    return it->second;
  };
  auto score = [&](const Dag& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += family_score(g, i);
    return s;
  };
  const auto dags = oracle::all_dags(data.names, 2);
  double best = -INFINITY;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < dags.size(); ++i)
    if (const double s = score(dags[i]); s > best) best = s, best_i = i;
  const auto truth_key = oracle::equivalence_key(truth.dag());
  const bool optimum_is_truth = oracle::equivalence_key(dags[best_i]) == truth_key;

  const Dag found = tabu_search(data, {10.0}, {}, 42);
  const bool tabu_in_class = oracle::equivalence_key(found) == truth_key && cpdag(found) == cpdag(truth.dag());
  const bool tabu_optimal = std::abs(score(found) - best) <= 1e-6 * std::abs(best);

  const auto boot = bootstrap_consensus(data, {10.0}, {}, {200, 0.5, ThresholdMode::undirected, 0}, 42);
  const bool skeleton = oracle::equivalence_key(boot.dag).skeleton == truth_key.skeleton;

  return verdict(optimum_is_truth && tabu_in_class && tabu_optimal && skeleton,
                 std::to_string(dags.size()) + " DAGs scored; exhaustive optimum in true class: " +
                     (optimum_is_truth ? "yes" : "no") + "; tabu in true class: " + (tabu_in_class ? "yes" : "no") +
                     "; tabu score = optimum: " + (tabu_optimal ? "yes" : "no") +
                     "; bootstrap(200, 0.5) skeleton exact: " + (skeleton ? "yes" : "no"));
}

Outcome mle_bit_exact() {
  std::mt19937_64 rng(1005);
  std::size_t rows_checked = 0, mismatches = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto truth = oracle::random_network(5, rng, 0.5, 3, 2 + rep % 2);
    const auto data = oracle::sample_panel(truth, 200 + 100 * rep, rng);
    const auto fit = fit_mle(truth.dag(), data);
    for (std::size_t i = 0; i < fit.size(); ++i) {
      const auto& c = fit.cpt(i);
      std::vector<std::vector<double>> n(c.rows.size(), std::vector<double>(c.cardinality(), 0.0));
      for (std::size_t t = 0; t < data.rows(); ++t) {
        std::size_t j = 0;
        for (std::size_t k = 0; k < c.parents.size(); ++k)
          j = j * c.parent_cards[k] + data.codes[data.column_index(c.parents[k])][t];
        n[j][data.codes[i][t]] += 1.0;
      }
      for (std::size_t j = 0; j < n.size(); ++j) {
        double tot = 0.0;
        for (double v : n[j]) tot += v;
        for (std::size_t s = 0; s < n[j].size(); ++s) {
          const double expect = tot > 0 ? n[j][s] / tot : 1.0 / static_cast<double>(n[j].size());
          mismatches += c.rows[j][s] != expect;
        }
        ++rows_checked;
      }
    }
  }
  return verdict(mismatches == 0, std::to_string(rows_checked) + " CPT rows, " + std::to_string(mismatches) +
                                      " entries differing from count ratios");
}

Outcome sensitivity_oracles() {
  // MI: d-separated pair and identity coupling of uniform ternaries.
  Dag d({"A", "B", "C"});
  d.add_edge("A", "B");
  const std::vector<double> u{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto& s = ternary_states();
  const BayesianNetwork coupled(d, {{"A", s, {}, {}, {u}},
                                    {"B", s, {"A"}, {3}, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                                    {"C", s, {}, {}, {{0.2, 0.5, 0.3}}}});
  const double mi_sep = mutual_information(coupled, "A", "C");
  const double mi_id = mutual_information(coupled, "A", "B");
  const bool mi_ok = mi_sep == 0.0 && std::abs(mi_id - std::log(3.0)) < 1e-12;

  std::mt19937_64 rng(1006);
  double sobol_err = 0.0, diam_err = 0.0, tornado_err = 0.0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto net = oracle::random_network(4, rng, 0.6, 3);
    const std::size_t t = rng() % 4;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i == t) continue;
      const auto j = oracle::pair_joint(net, i, t);
      std::vector<double> pt(3, 0.0), px(3, 0.0);
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b) pt[b] += j[a][b], px[a] += j[a][b];
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        den += pt[k] * (1 - pt[k]);
        for (std::size_t a = 0; a < 3; ++a) num += px[a] * std::pow(j[a][k] / px[a] - pt[k], 2);
      }
      sobol_err = std::max(sobol_err, std::abs(sobol_index(net, net.name(t), net.name(i)) - num / den));
    }
    for (auto [p, c] : net.dag().edges()) {
      const Cpt& cpt = net.cpt(c);
      std::size_t pos = 0;
      while (cpt.parents[pos] != net.name(p)) ++pos;
      double expect = 0.0;
      for (std::size_t r1 = 0; r1 < cpt.rows.size(); ++r1)
        for (std::size_t r2 = r1 + 1; r2 < cpt.rows.size(); ++r2) {
          const auto s1 = cpt.config_states(r1), s2 = cpt.config_states(r2);
          std::size_t diff = 0;
          for (std::size_t k = 0; k < s1.size(); ++k) diff += s1[k] != s2[k];
          if (diff != 1 || s1[pos] == s2[pos]) continue;
          double tv = 0.0;
          for (std::size_t k = 0; k < 3; ++k) tv += std::abs(cpt.rows[r1][k] - cpt.rows[r2][k]);
          expect = std::max(expect, tv / 2);
        }
      diam_err = std::max(diam_err, std::abs(arc_diameter(net, net.name(p), net.name(c)) - expect));
    }
    if (rep < 10) {
      const std::size_t ts = rng() % 3;
      for (const auto& e : tornado(net, net.name(t), net.states(t)[ts], {0.05, 1000})) {
        const auto node = net.index(e.node);
        const auto st = net.state_index(node, e.state);
        const double theta = e.theta;
        auto out = [&](double v) {
          Cpt c = net.cpt(node);
          auto& row = c.rows[e.configuration];
          const double rest = 1.0 - row[st];
          for (std::size_t l = 0; l < row.size(); ++l)
            if (l != st) row[l] = rest > 0 ? row[l] * (1 - v) / rest : (1 - v) / (row.size() - 1);
          row[st] = v;
          return oracle::posterior(net.with_cpt(node, c), t, oracle::Evidence(4))[ts];
        };
        const double h = std::min({0.05, theta, 1 - theta});
        const double fd = h > 0 ? (out(theta + h) - out(theta - h)) / (2 * h)
                                : (theta == 0 ? (out(0.05) - out(0)) / 0.05 : (out(1) - out(0.95)) / 0.05);
        tornado_err = std::max(tornado_err, std::abs(fd - e.sensitivity_value));
      }
    }
  }
  const bool ok = mi_ok && sobol_err <= 1e-9 && diam_err == 0.0 && tornado_err <= 1e-6;
  return verdict(ok, "MI d-separated " + fmt(mi_sep) + ", MI identity - ln3 " + fmt(mi_id - std::log(3.0)) +
                         "; Sobol max err " + fmt(sobol_err) + "; diameter max err " + fmt(diam_err) +
                         "; tornado vs central FD max err " + fmt(tornado_err));
}

Outcome garch_recovery() {
  const std::vector<double> alpha{0.1}, beta{0.8};
  const auto x = simulate_garch(3000, 0.0, 0.1, alpha, beta, 42);
  FilterOptions opt;
  opt.mode = FilterMode::garch_only;
  opt.grid = {0, 3, 3};
  opt.prescaled = true;
  const auto m = fit_filter(x, opt, "sim");
  std::vector<double> z2, x2;
  for (double r : m.residuals) z2.push_back(r * opt.scale * r * opt.scale);
  for (double v : x) x2.push_back(v * v);
  const double lb_z = ljung_box(z2, 20), lb_x = ljung_box(x2, 20);
  const bool order = m.garch_p == 1 && m.garch_q == 1;
  const bool params = order && std::abs(m.omega - 0.1) <= 0.05 && std::abs(m.alpha[0] - 0.1) <= 0.05 &&
                      std::abs(m.beta[0] - 0.8) <= 0.05;
  return verdict(order && params && lb_z < lb_x,
                 "selected (" + std::to_string(m.garch_p) + "," + std::to_string(m.garch_q) + "), omega " +
                     fmt(m.omega) + " alpha " + (order ? fmt(m.alpha[0]) : "-") + " beta " +
                     (order ? fmt(m.beta[0]) : "-") + "; Ljung-Box(20) squared z " + fmt(lb_z, 4) + " vs raw " +
                     fmt(lb_x, 4));
}

Outcome discretization() {
  std::mt19937_64 rng(1008);
  std::student_t_distribution<double> dist(4.0);
  std::size_t invariance_failures = 0, series = 0;
  double worst = 0.0;
  for (std::size_t n : {3u, 10u, 101u, 500u, 1000u, 1001u, 2000u, 2999u}) {
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    TimePanel p;
    p.kind = SeriesKind::residuals;
    p.names = {"V"};
    for (std::size_t t = 0; t < n; ++t) p.dates.push_back(std::string(6 - std::to_string(t).size(), '0') + std::to_string(t));
    p.columns = {v};
    const auto base = discretize(p).codes[0];
    std::array<std::size_t, 3> c{};
    for (auto k : base) ++c[k];
    for (auto k : c) worst = std::max(worst, std::abs(static_cast<double>(k) - n / 3.0));
    for (auto f : std::vector<std::function<double(double)>>{[](double x) { return std::exp(x); },
                                                             [](double x) { return x * x * x; },
                                                             [](double x) { return 3.0 * x - 2.0; },
                                                             [](double x) { return std::atan(x); }}) {
      TimePanel q = p;
      for (auto& x : q.columns[0]) x = f(x);
      invariance_failures += discretize(q).codes[0] != base;
    }
    ++series;
  }
  return verdict(worst <= 1.0 && invariance_failures == 0,
                 std::to_string(series) + " series, max |count - n/3| " + fmt(worst) + ", " +
                     std::to_string(invariance_failures) + " transform mismatches");
}

Outcome dbn_checks() {
  std::mt19937_64 rng(1009);
  // Unrolled inference against enumeration through the transition rows.
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t m = 2 + rep % 3;
    TwoSliceNetwork tsn{oracle::random_network(m, rng, 0.5, 2), {}};
    for (std::size_t j = 0; j < m; ++j) {
      Cpt c{tsn.static_net.name(j), tsn.static_net.states(j), {}, {}, {}};
      std::size_t q = 1;
      for (std::size_t i = 0; i < m; ++i)
        if (c.parents.size() < 2 && rng() % 2) c.parents.push_back(tsn.static_net.name(i)), c.parent_cards.push_back(3), q *= 3;
      for (std::size_t r = 0; r < q; ++r) c.rows.push_back(oracle::random_row(3, rng));
      tsn.transitions.push_back(c);
    }
    const std::size_t target = rng() % m;
    oracle::Evidence e(m);
    if (rng() % 2) e[(target + 1) % m] = rng() % 3;
    const auto got = temporal_query(tsn, to_map(tsn.static_net, e), tsn.static_net.name(target)).at_next.distribution;
    const Cpt& tr = tsn.transitions[target];
    std::vector<double> expect(3, 0.0);
    double z = 0.0;
    oracle::for_each_assignment(tsn.static_net, [&](const std::vector<std::size_t>& x, double p) {
      if (!oracle::consistent(x, e)) return;
      std::size_t row = 0;
      for (std::size_t k = 0; k < tr.parents.size(); ++k) row = row * 3 + x[tsn.static_net.index(tr.parents[k])];
      for (std::size_t s = 0; s < 3; ++s) expect[s] += p * tr.rows[row][s];
      z += p;
    });
    for (std::size_t s = 0; s < 3; ++s) worst = std::max(worst, std::abs(got[s] - expect[s] / z));
  }

  // i.i.d. days: transition layer should be empty; slice T must be untouched.
  // Default learning settings (200 resamples, threshold 0.5) on 2000-day panels.
  const int trials = 100;
  int empty = 0, static_changed = 0;
  TransitionLearning opt;
  for (int k = 0; k < trials; ++k) {
    std::mt19937_64 trng(5000 + k);
    const auto truth = oracle::random_network(4, trng, 0.5, 2);
    const auto panel = oracle::sample_panel(truth, 2000, trng);
    const auto static_net = fit_mle(truth.dag(), panel);
    const auto tsn = learn_transitions(panel, static_net, opt, static_cast<std::uint64_t>(k));
    empty += tsn.transition_edge_count() == 0;
    bool same = tsn.static_net.dag() == static_net.dag();
    for (std::size_t i = 0; i < static_net.size(); ++i) same = same && tsn.static_net.cpt(i).rows == static_net.cpt(i).rows;
    static_changed += !same;
  }
  const bool ok = worst <= 1e-10 && empty >= 0.95 * trials && static_changed == 0;
  return verdict(ok, "unrolled max |diff| " + fmt(worst) + "; empty transition layer in " + std::to_string(empty) +
                         "/" + std::to_string(trials) + " i.i.d. trials; slice-T changed in " +
                         std::to_string(static_changed));
}

// Published reference values, percent, in High/Neutral/Low order unless noted.
Outcome published_reproduction() {
  const char* model_path = std::getenv("CARBONBN_PUBLISHED_MODEL");
  if (!model_path || !*model_path)
    return {Status::skip, "published network not available offline; set CARBONBN_PUBLISHED_MODEL (and "
                          "CARBONBN_PUBLISHED_TWO_SLICE) to a model JSON to run"};
  const auto net = load_network(model_path);
  std::vector<std::string> misses;
  auto pct = [&](const std::string& target, const EvidenceMap& ev, const std::vector<std::string>& order,
                 const std::vector<double>& expect, const std::string& label, auto&& query) {
    const auto dist = query(target, ev);
    for (std::size_t k = 0; k < order.size(); ++k) {
      const double got = 100.0 * dist[net.state_index(net.index(target), order[k])];
      if (std::abs(got - expect[k]) > 1.0) misses.push_back(label + " " + order[k] + " " + fmt(got, 3) + " vs " + fmt(expect[k]));
    }
  };
  auto static_query = [&](const std::string& t, const EvidenceMap& ev) { return posterior(net, t, ev).distribution; };
  const std::vector<std::string> hnl{"High", "Neutral", "Low"};
  pct("MO1", {{"XA1", "High"}}, hnl, {43, 32, 25}, "MO1|XA1=High", static_query);
  pct("MO1", {{"XA1", "Low"}}, hnl, {25, 32, 43}, "MO1|XA1=Low", static_query);
  pct("MO1", {{"MXEU0EN", "High"}}, hnl, {40, 33, 27}, "MO1|MXEU0EN=High", static_query);
  pct("MO1", {{"MXEU0EN", "Low"}}, hnl, {27, 32, 42}, "MO1|MXEU0EN=Low", static_query);

  const std::map<std::string, std::vector<std::string>> mpe_expect{
      // node -> state under MO1 = High, Low, Neutral
      {"CAC", {"High", "Low", "Neutral"}},     {"CO1", {"High", "Low", "Neutral"}},
      {"DAX", {"High", "Low", "Neutral"}},     {"ECO", {"High", "Low", "High"}},
      {"EURCHF", {"Low", "High", "High"}},     {"EURCNY", {"Low", "High", "High"}},
      {"EURGBP", {"Low", "High", "High"}},     {"EURRUB", {"Low", "High", "High"}},
      {"EURUSD", {"Low", "High", "High"}},     {"LBEATREU", {"Low", "Low", "Low"}},
      {"LP01TREU", {"High", "Low", "Low"}},    {"MXEU0EN", {"High", "Low", "Neutral"}},
      {"NG1", {"High", "Low", "High"}},        {"SPGTCED", {"High", "Low", "High"}},
      {"SPX", {"High", "Low", "High"}},        {"SXXP", {"High", "Low", "Neutral"}},
      {"VIX", {"Low", "High", "Low"}},         {"XA1", {"High", "Low", "Neutral"}},
      {"XAU", {"Low", "High", "High"}}};
  const std::vector<std::string> conditions{"High", "Low", "Neutral"};
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    const auto r = mpe(net, {{"MO1", conditions[c]}});
    for (const auto& [node, states] : mpe_expect) {
      auto it = r.assignment.find(node);
      if (it == r.assignment.end() || it->second != states[c])
        misses.push_back("MPE MO1=" + conditions[c] + " " + node + " " + (it == r.assignment.end() ? "?" : it->second));
    }
  }

  const auto rep = sensitivity_report(net, "MO1");
  const std::vector<std::pair<std::string, double>> top5{
      {"XA1", 0.470}, {"MXEU0EN", 0.333}, {"SXXP", 0.070}, {"CAC", 0.067}, {"DAX", 0.051}};
  for (std::size_t k = 0; k < top5.size() && k < rep.nodes.size(); ++k) {
    if (rep.nodes[k].node != top5[k].first) misses.push_back("Sobol rank " + std::to_string(k + 1) + " " + rep.nodes[k].node);
    else if (std::abs(rep.nodes[k].sobol - top5[k].second) > 0.005) misses.push_back("Sobol " + top5[k].first + " " + fmt(rep.nodes[k].sobol));
  }
  const double mi = 100.0 * mutual_information(net, "MO1", "MXEU0EN");
  if (std::abs(mi - 1.858) > 0.01) misses.push_back("MI x100 MXEU0EN " + fmt(mi, 4));

  std::string temporal_note = "; two-slice reference not checked (CARBONBN_PUBLISHED_TWO_SLICE unset)";
  if (const char* tpath = std::getenv("CARBONBN_PUBLISHED_TWO_SLICE"); tpath && *tpath) {
    const auto tsn = load_two_slice(tpath);
    auto next = [&](const std::string& t, const EvidenceMap& ev) { return temporal_query(tsn, ev, t).at_next.distribution; };
    const std::vector<std::string> lnh{"Low", "Neutral", "High"};
    pct("MO1", {{"CO1", "High"}}, lnh, {30, 34, 35}, "T+1 MO1|CO1=High", next);
    pct("MO1", {{"CO1", "Low"}}, lnh, {35, 32, 31}, "T+1 MO1|CO1=Low", next);
    pct("MO1", {{"XA1", "High"}}, lnh, {34, 33, 32}, "T+1 MO1|XA1=High", next);
    pct("MO1", {{"XA1", "Low"}}, lnh, {32, 33, 34}, "T+1 MO1|XA1=Low", next);
    temporal_note.clear();
  }
  std::string detail = misses.empty() ? "all reference values within tolerance" : std::to_string(misses.size()) + " deviations:";
  for (std::size_t k = 0; k < misses.size() && k < 8; ++k) detail += " [" + misses[k] + "]";
  return verdict(misses.empty(), detail + temporal_note);
}

Outcome end_to_end_determinism() {
  const std::string input = std::string(CARBONBN_SOURCE_DIR) + "/data/synthetic_prices.csv";
  if (!fs::exists(input)) return fail("bundled synthetic data missing: " + input);
  const auto dir = fs::temp_directory_path() / "carbonbn_acceptance_e2e";
  fs::remove_all(dir);
  PipelineConfig cfg;
  cfg.input = input;
  cfg.output_dir = (dir / "out").string();
  cfg.target = "EUA";
  cfg.resamples = 50;

  auto run = [&] {
    const auto t0 = Clock::now();
    cmd_prep(cfg);
    cmd_learn(cfg);
    cmd_analyze(cfg);
    cmd_dbn(cfg);
    return seconds_since(t0);
  };
  auto snapshot = [&] {
    std::map<std::string, std::string> h;
    for (const auto& e : fs::directory_iterator(cfg.output_dir)) h[e.path().filename().string()] = sha256_file(e.path().string());
    return h;
  };
  const double first_secs = run();
  const auto first = snapshot();
  const double second_secs = run();
  const auto second = snapshot();
  fs::remove_all(dir);
  std::size_t differing = 0;
  for (const auto& [name, hash] : first) differing += !second.count(name) || second.at(name) != hash;
  differing += second.size() > first.size() ? second.size() - first.size() : 0;
  const bool ok = differing == 0 && first_secs < 300.0 && second_secs < 300.0;
  return verdict(ok, std::to_string(first.size()) + " output files, " + std::to_string(differing) +
                         " differing between runs; run times " + fmt(first_secs) + " s and " + fmt(second_secs) + " s");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"exact inference: variable elimination equals enumeration", ve_vs_enumeration},
      {"MPE equals exhaustive argmax", mpe_vs_argmax},
      {"BDeu score equivalence across each CPDAG", bdeu_equivalence},
      {"structure recovery: tabu class and bootstrap skeleton", structure_recovery},
      {"MLE CPT rows equal count ratios bit-for-bit", mle_bit_exact},
      {"sensitivity measures equal their oracles", sensitivity_oracles},
      {"GARCH order and parameter recovery, residual whitening", garch_recovery},
      {"tertile discretization counts and monotone invariance", discretization},
      {"two-slice DBN inference, i.i.d. null and slice-T stability", dbn_checks},
      {"published model reproduction", published_reproduction},
      {"end-to-end determinism on bundled synthetic data", end_to_end_determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    failures += o.status == Status::fail;
    std::cout << tag << "  [" << (k + 1) << "] " << criteria[k].first << " -- " << o.detail << " ("
              << fmt(seconds_since(t0)) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
