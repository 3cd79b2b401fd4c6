#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "carbonbn/errors.hpp"
#include "carbonbn/garch.hpp"

using namespace carbonbn;

namespace {

double ljung_box_oracle(const std::vector<double>& x, int lags) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  double q = 0.0;
  for (int k = 1; k <= lags; ++k) {
    double num = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < x.size(); ++t) num += (x[t] - mean) * (x[t - k] - mean);
    const double rho = num / denom;
    q += rho * rho / (n - k);
  }
  return n * (n + 2.0) * q;
}

std::vector<double> squares(const std::vector<double>& x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * x[i];
  return out;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

void check_model_invariants(const FilterModel& m, std::size_t n) {
  CHECK(m.omega > 0.0);
  for (double a : m.alpha) CHECK(a >= 0.0);
  for (double b : m.beta) CHECK(b >= 0.0);
  CHECK(m.persistence() < 1.0);
  CHECK(static_cast<int>(m.alpha.size()) == m.garch_p);
  CHECK(static_cast<int>(m.beta.size()) == m.garch_q);
  CHECK(static_cast<int>(m.ar_coef.size()) == m.ar_order);
  CHECK(m.residuals.size() == n - static_cast<std::size_t>(m.ar_order));
  for (double r : m.residuals) CHECK(std::isfinite(r));
}

}  // namespace

TEST_CASE("Ljung-Box matches a direct evaluation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> x(400);
  for (auto& v : x) v = z(rng);
  CHECK(ljung_box(x, 20) == doctest::Approx(ljung_box_oracle(x, 20)).epsilon(1e-12));
  CHECK_THROWS_AS(ljung_box(std::vector<double>{1, 2, 3}, 5), InputError);
}

TEST_CASE("simulated GARCH(1,1) is recovered and whitened") {
  const std::vector<double> alpha{0.1}, beta{0.8};
  const auto x = simulate_garch(3000, 0.0, 0.1, alpha, beta, 42);
  FilterOptions opt;
  opt.mode = FilterMode::garch_only;
  opt.grid = {0, 3, 3};
  opt.prescaled = true;
  const auto m = fit_filter(x, opt, "sim");
  CHECK(m.garch_p == 1);
  CHECK(m.garch_q == 1);
  CHECK(std::abs(m.omega - 0.1) < 0.05);
  CHECK(std::abs(m.alpha[0] - 0.1) < 0.05);
  CHECK(std::abs(m.beta[0] - 0.8) < 0.05);
  check_model_invariants(m, x.size());
  CHECK(m.skipped_cells.empty());
  std::vector<double> z(m.residuals);
  for (auto& v : z) v *= opt.scale;
  CHECK(ljung_box(squares(z), 20) < ljung_box(squares(x), 20));
}

TEST_CASE("AR mean structure is selected by BIC") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> z;
  std::vector<double> y(2000);
  double prev = 0.0, h = 1.0, e = 0.0;
  for (auto& v : y) {
    h = 0.1 + 0.1 * e * e + 0.8 * h;
    e = std::sqrt(h) * z(rng);
    v = 0.2 + 0.4 * prev + e;
    prev = v;
  }
  FilterOptions opt;
  opt.grid = {3, 2, 2};
  opt.prescaled = true;
  const auto m = fit_filter(y, opt);
  CHECK(m.ar_order == 1);
  CHECK(std::abs(m.ar_coef[0] - 0.4) < 0.05);
  check_model_invariants(m, y.size());
}

TEST_CASE("i.i.d. noise leaves the variance essentially constant") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> z(0.0, 0.01);
  std::vector<double> x(1500);
  for (auto& v : x) v = z(rng);
  FilterOptions opt;
  opt.mode = FilterMode::garch_only;
  opt.grid = {0, 1, 1};
  const auto m = fit_filter(x, opt);
  CHECK(m.alpha[0] < 0.05);
  // Standardized residuals are the input over a nearly constant scale.
  CHECK(correlation(m.residuals, x) > 0.99);
  const double sd = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0) / x.size());
  const double r0 = m.residuals[100] * opt.scale, ratio = x[100] / sd;
  CHECK(std::abs(r0 - ratio) < 0.1 * std::max(1.0, std::abs(ratio)));
}

TEST_CASE("internal scaling equals caller-side scaling") {
  const std::vector<double> alpha{0.12}, beta{0.75};
  auto raw = simulate_garch(800, 0.0, 0.05, alpha, beta, 9);
  for (auto& v : raw) v /= 1000.0;
  std::vector<double> scaled(raw);
  for (auto& v : scaled) v *= 1000.0;
  FilterOptions a;
  a.grid = {1, 2, 1};
  FilterOptions b = a;
  b.prescaled = true;
  const auto ma = fit_filter(raw, a);
  const auto mb = fit_filter(scaled, b);
  CHECK(ma.ar_order == mb.ar_order);
  CHECK(ma.garch_p == mb.garch_p);
  CHECK(ma.garch_q == mb.garch_q);
  REQUIRE(ma.residuals.size() == mb.residuals.size());
  for (std::size_t i = 0; i < ma.residuals.size(); ++i) CHECK(std::abs(ma.residuals[i] - mb.residuals[i]) < 1e-9);
}

TEST_CASE("grid search is deterministic") {
  const std::vector<double> alpha{0.1}, beta{0.85};
  const auto x = simulate_garch(700, 0.1, 0.05, alpha, beta, 4);
  FilterOptions opt;
  opt.grid = {2, 2, 2};
  opt.prescaled = true;
  const auto m1 = fit_filter(x, opt);
  const auto m2 = fit_filter(x, opt);
  CHECK(m1.ar_order == m2.ar_order);
  CHECK(m1.garch_p == m2.garch_p);
  CHECK(m1.garch_q == m2.garch_q);
  CHECK(m1.bic == m2.bic);
  CHECK(m1.residuals == m2.residuals);
}

TEST_CASE("BIC uses k ln(n) - 2 lnL on the common sample") {
  const std::vector<double> alpha{0.1}, beta{0.8};
  const auto x = simulate_garch(900, 0.0, 0.1, alpha, beta, 77);
  const auto cell = fit_garch_cell(x, 0, 1, 1);
  REQUIRE(cell.has_value());
  CHECK(cell->n_obs == x.size());
  CHECK(cell->bic == doctest::Approx(4.0 * std::log(900.0) - 2.0 * cell->log_likelihood).epsilon(1e-12));
  const auto lagged = fit_garch_cell(x, 2, 1, 1);
  REQUIRE(lagged.has_value());
  CHECK(lagged->n_obs == x.size() - 2);
}

TEST_CASE("filter preconditions") {
  std::vector<double> short_series(100, 0.01);
  CHECK_THROWS_AS(fit_filter(short_series, {}), InputError);
  std::vector<double> bad(600, 0.01);
  bad[10] = std::nan("");
  CHECK_THROWS_AS(fit_filter(bad, {}), InputError);
  CHECK(parse_filter_mode("garch_only") == FilterMode::garch_only);
  CHECK(to_string(FilterMode::ar_garch) == "ar_garch");
  CHECK_THROWS_AS(parse_filter_mode("arma"), InputError);
}

TEST_CASE("panel filtering aligns residual dates") {
  const std::vector<double> alpha{0.1}, beta{0.8};
  TimePanel r;
  r.kind = SeriesKind::log_returns;
  r.names = {"A", "B"};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  std::vector<double> a(600), b = simulate_garch(600, 0.0, 0.1, alpha, beta, 5);
  double prev = 0.0;
  for (auto& v : a) v = prev = 0.6 * prev + z(rng);
  for (auto& v : a) v /= 1000.0;
  for (auto& v : b) v /= 1000.0;
  r.columns = {a, b};
  for (std::size_t t = 0; t < 600; ++t) r.dates.push_back(std::to_string(100000 + t));
  FilterOptions opt;
  opt.grid = {2, 1, 1};
  const auto f = filter_panel(r, opt);
  const std::size_t lag = static_cast<std::size_t>(std::max(f.models[0].ar_order, f.models[1].ar_order));
  CHECK(f.models[0].ar_order >= 1);
  CHECK(f.residuals.kind == SeriesKind::residuals);
  CHECK(f.residuals.rows() == 600 - lag);
  CHECK(f.residuals.dates.front() == r.dates[lag]);
  CHECK_NOTHROW(f.residuals.validate());
  // The last residual of each series belongs to the last date.
  CHECK(f.residuals.columns[0].back() == f.models[0].residuals.back());
  CHECK(f.residuals.columns[1].back() == f.models[1].residuals.back());
}
