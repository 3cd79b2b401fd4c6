// Writes a synthetic daily price panel with known cross-sectional and
// one-day-lagged dependence and GARCH(1,1) volatility in every series.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

#include "CLI11.hpp"

namespace {

std::vector<std::string> business_days(std::size_t n) {
  using namespace std::chrono;
  std::vector<std::string> out;
  sys_days day = year{2016} / January / 4;
  while (out.size() < n) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{day};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day()));
      out.emplace_back(buf);
    }
    day += days{1};
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic price panel"};
  std::size_t n = 2000;
  std::uint64_t seed = 7;
  std::string path = "synthetic_prices.csv";
  app.add_option("--days", n)->capture_default_str();
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--out", path)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  // EQ -> OIL -> GAS -> COAL, {GAS, EQ} -> EUA, and OIL(t-1) -> EUA(t).
  const std::vector<std::string> names{"EUA", "OIL", "GAS", "COAL", "EQ"};
  constexpr double kOmega = 0.05, kAlpha = 0.08, kBeta = 0.87, kDailyVol = 0.015;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;

  const std::size_t burn = 250;
  std::vector<double> h(names.size(), kOmega / (1.0 - kAlpha - kBeta));
  std::vector<double> last_eps(names.size(), 0.0);
  std::vector<double> price(names.size(), 100.0);
  double prev_oil = 0.0;
  const auto dates = business_days(n);

  std::ofstream out(path);
  if (!out) {
    std::cerr << "cannot write " << path << '\n';
    return 2;
  }
  out << "date";
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  for (std::size_t t = 0; t < n + burn; ++t) {
    const double eq = gauss(rng);
    const double oil = 0.6 * eq + 0.8 * gauss(rng);
    const double gas = 0.6 * oil + 0.8 * gauss(rng);
    const double coal = 0.6 * gas + 0.8 * gauss(rng);
    const double eua = 0.5 * gas + 0.4 * eq + 0.45 * prev_oil + 0.62 * gauss(rng);
    prev_oil = oil;
    const double z[] = {eua, oil, gas, coal, eq};
    for (std::size_t k = 0; k < names.size(); ++k) {
      h[k] = kOmega + kAlpha * last_eps[k] * last_eps[k] + kBeta * h[k];
      last_eps[k] = std::sqrt(h[k]) * z[k];
      if (t >= burn) price[k] *= std::exp(kDailyVol * last_eps[k]);
    }
    if (t < burn) continue;
    out << dates[t - burn];
    char buf[32];
    for (double p : price) {
      std::snprintf(buf, sizeof buf, ",%.6f", p);
      out << buf;
    }
    out << '\n';
  }
  return 0;
}
