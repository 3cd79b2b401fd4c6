#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "carbonbn/dbn.hpp"
#include "carbonbn/errors.hpp"

using namespace carbonbn;

namespace {

TwoSliceNetwork random_two_slice(std::size_t m, std::mt19937_64& rng) {
  TwoSliceNetwork tsn{oracle::random_network(m, rng, 0.5, 2), {}};
  std::bernoulli_distribution coin(0.4);
  for (std::size_t j = 0; j < m; ++j) {
    Cpt c{tsn.static_net.name(j), tsn.static_net.states(j), {}, {}, {}};
    std::size_t q = 1;
    for (std::size_t i = 0; i < m; ++i)
      if (c.parents.size() < 2 && coin(rng)) {
        c.parents.push_back(tsn.static_net.name(i));
        c.parent_cards.push_back(tsn.static_net.cardinality(i));
        q *= tsn.static_net.cardinality(i);
      }
    for (std::size_t r = 0; r < q; ++r) c.rows.push_back(oracle::random_row(c.states.size(), rng));
    tsn.transitions.push_back(c);
  }
  return tsn;
}

/// P(node at T+1 | evidence at T) = sum over the transition parents' joint at T of the transition row.
std::vector<double> next_slice_oracle(const TwoSliceNetwork& tsn, std::size_t node, const oracle::Evidence& e) {
  const auto& net = tsn.static_net;
  const Cpt& tr = tsn.transitions[node];
  std::vector<double> out(tr.states.size(), 0.0);
  double z = 0.0;
  oracle::for_each_assignment(net, [&](const std::vector<std::size_t>& x, double p) {
    if (!oracle::consistent(x, e)) return;
    std::size_t row = 0;
    for (std::size_t k = 0; k < tr.parents.size(); ++k) row = row * tr.parent_cards[k] + x[net.index(tr.parents[k])];
    for (std::size_t s = 0; s < out.size(); ++s) out[s] += p * tr.rows[row][s];
    z += p;
  });
  for (auto& v : out) v /= z;
  return out;
}

/// Independent AR-like chains: each column keeps its state with probability `stay`.
DiscretePanel persistent_panel(std::size_t cols, std::size_t rows, double stay, std::mt19937_64& rng) {
  std::vector<std::vector<std::uint8_t>> codes(cols, std::vector<std::uint8_t>(rows));
  std::bernoulli_distribution keep(stay);
  std::uniform_int_distribution<int> any(0, 2);
  for (auto& c : codes) {
    c[0] = static_cast<std::uint8_t>(any(rng));
    for (std::size_t t = 1; t < rows; ++t) c[t] = keep(rng) ? c[t - 1] : static_cast<std::uint8_t>(any(rng));
  }
  return DiscretePanel::from_codes(oracle::node_names(cols), codes);
}

BayesianNetwork empty_static(const DiscretePanel& p) { return fit_mle(Dag(p.names), p); }

}  // namespace

TEST_CASE("lagged panel pairs consecutive days") {
  const auto p = DiscretePanel::from_codes({"A", "B"}, {{0, 1, 2, 0}, {2, 2, 1, 0}});
  const auto l = build_lagged_panel(p);
  CHECK(l.names == std::vector<std::string>{"A", "B", "A@T+1", "B@T+1"});
  CHECK(l.rows() == 3);
  CHECK(l.codes[0] == std::vector<std::uint8_t>{0, 1, 2});
  CHECK(l.codes[2] == std::vector<std::uint8_t>{1, 2, 0});
  CHECK(l.codes[3] == std::vector<std::uint8_t>{2, 1, 0});
  CHECK_THROWS_AS(build_lagged_panel(DiscretePanel::from_codes({"A"}, {{0}})), InputError);
}

TEST_CASE("unrolled inference matches enumeration") {
  std::mt19937_64 rng(300);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t m = 2 + rng() % 3;
    const auto tsn = random_two_slice(m, rng);
    REQUIRE_NOTHROW(tsn.validate());
    const auto un = unroll(tsn);
    CHECK(un.size() == 2 * m);
    const std::size_t target = rng() % m;
    oracle::Evidence e(m);
    EvidenceMap em;
    for (std::size_t i = 0; i < m; ++i)
      if (i != target && rng() % 2) {
        e[i] = rng() % 3;
        em[tsn.static_net.name(i)] = tsn.static_net.states(i)[*e[i]];
      }
    const auto report = temporal_query(tsn, em, tsn.static_net.name(target));
    const auto expect_next = next_slice_oracle(tsn, target, e);
    const auto expect_now = oracle::posterior(tsn.static_net, target, e);
    // Enumeration over the unrolled network as a second route.
    oracle::Evidence ue(2 * m);
    for (std::size_t i = 0; i < m; ++i) ue[i] = e[i];
    const auto unrolled = oracle::posterior(un, m + target, ue);
    CHECK(report.at_next.target == tsn.static_net.name(target));
    for (std::size_t s = 0; s < 3; ++s) {
      CHECK(std::abs(report.at_next.distribution[s] - expect_next[s]) < 1e-10);
      CHECK(std::abs(unrolled[s] - expect_next[s]) < 1e-10);
      CHECK(std::abs(report.at_t.distribution[s] - expect_now[s]) < 1e-10);
    }
  }
}

TEST_CASE("observed target reports a point mass at T") {
  std::mt19937_64 rng(301);
  const auto tsn = random_two_slice(3, rng);
  const auto r = temporal_query(tsn, {{"X0", "High"}}, "X0");
  CHECK(r.at_t.distribution == std::vector<double>{0, 0, 1});
  oracle::Evidence e(3);
  e[0] = 2;
  const auto expect = next_slice_oracle(tsn, 0, e);
  for (std::size_t s = 0; s < 3; ++s) CHECK(std::abs(r.at_next.distribution[s] - expect[s]) < 1e-10);
}

TEST_CASE("unrolled names and slice-T structure") {
  std::mt19937_64 rng(302);
  const auto tsn = random_two_slice(3, rng);
  const auto un = unroll(tsn);
  CHECK(un.name(3) == "X0@T+1");
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(un.cpt(i).parents == tsn.static_net.cpt(i).parents);
    CHECK(un.cpt(i).rows == tsn.static_net.cpt(i).rows);
    CHECK(un.cpt(3 + i).rows == tsn.transitions[i].rows);
    for (const auto& p : un.cpt(3 + i).parents) CHECK(p.find('@') == std::string::npos);
  }
}

TEST_CASE("two-slice validation") {
  std::mt19937_64 rng(303);
  auto tsn = random_two_slice(3, rng);
  auto bad = tsn;
  bad.transitions.pop_back();
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = tsn;
  bad.transitions[0].parents = {"Q"};
  bad.transitions[0].parent_cards = {3};
  bad.transitions[0].rows.assign(3, {0.2, 0.3, 0.5});
  CHECK_THROWS_AS(bad.validate(), InputError);
  bad = tsn;
  bad.transitions[1].rows[0][0] += 0.1;
  CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("independent days give an empty transition layer") {
  TransitionLearning opt;
  opt.single_run = true;
  int empty = 0;
  const int trials = 20;
  for (int k = 0; k < trials; ++k) {
    std::mt19937_64 rng(400 + k);
    const auto panel = persistent_panel(3, 800, 0.0, rng);
    const auto tsn = learn_transitions(panel, empty_static(panel), opt, k);
    empty += tsn.transition_edge_count() == 0;
  }
  CHECK(empty >= 19);
}

TEST_CASE("persistent series give self-loops and keep slice T") {
  std::mt19937_64 rng(500);
  const auto panel = persistent_panel(3, 1500, 0.6, rng);
  Dag d(panel.names);
  d.add_edge(0, 1);
  const auto static_net = fit_mle(d, panel);
  TransitionLearning opt;
  opt.bootstrap.resamples = 10;
  opt.bootstrap.threads = 1;
  const auto tsn = learn_transitions(panel, static_net, opt, 9);
  CHECK(tsn.self_loop_count() == 3);
  CHECK(tsn.transition_edge_count() == 3);
  CHECK(tsn.static_net.dag() == static_net.dag());
  for (std::size_t i = 0; i < 3; ++i) CHECK(tsn.static_net.cpt(i).rows == static_net.cpt(i).rows);
  // Transition rows are the empirical day-to-day frequencies.
  const auto& tr = tsn.transitions[2];
  REQUIRE(tr.parents == std::vector<std::string>{"X2"});
  std::array<double, 3> from_low{};
  for (std::size_t t = 0; t + 1 < panel.rows(); ++t)
    if (panel.codes[2][t] == 0) from_low[panel.codes[2][t + 1]] += 1;
  const double tot = from_low[0] + from_low[1] + from_low[2];
  for (std::size_t s = 0; s < 3; ++s) CHECK(tr.rows[0][s] == from_low[s] / tot);
  // Deterministic given the seed.
  const auto again = learn_transitions(panel, static_net, opt, 9);
  for (std::size_t i = 0; i < 3; ++i) CHECK(again.transitions[i].rows == tsn.transitions[i].rows);
}

TEST_CASE("panel must match the static network") {
  std::mt19937_64 rng(501);
  const auto panel = persistent_panel(2, 100, 0.5, rng);
  const auto other = DiscretePanel::from_codes({"P", "Q"}, panel.codes);
  CHECK_THROWS_AS(learn_transitions(other, empty_static(panel), {}, 1), InputError);
}
