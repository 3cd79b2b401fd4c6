#include "carbonbn/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "carbonbn/errors.hpp"

namespace carbonbn {

std::size_t DiscretePanel::column_index(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError("unknown column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool DiscretePanel::has_column(std::string_view name) const {
  return std::find(names.begin(), names.end(), name) != names.end();
}

void DiscretePanel::validate() const {
  if (codes.size() != names.size() || states.size() != names.size())
    throw InputError("discrete panel shape mismatch");
  const std::size_t n = rows();
  if (!dates.empty() && dates.size() != n) throw InputError("discrete panel date index length mismatch");
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (states[c].empty() || states[c].size() > 255) throw InputError("column '" + names[c] + "' has bad state list");
    if (codes[c].size() != n) throw InputError("column '" + names[c] + "' length mismatch");
    for (auto code : codes[c])
      if (code >= states[c].size()) throw InputError("column '" + names[c] + "' has out-of-range state code");
  }
  auto sorted = names;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("duplicate column names in discrete panel");
}

DiscretePanel DiscretePanel::from_codes(std::vector<std::string> names,
                                        std::vector<std::vector<std::uint8_t>> codes,
                                        const std::vector<std::string>& labels) {
  DiscretePanel panel;
  panel.states.assign(names.size(), labels);
  panel.names = std::move(names);
  panel.codes = std::move(codes);
  panel.validate();
  return panel;
}

Thresholds tertile_cuts(std::span<const double> values) {
  if (values.empty()) throw InputError("cannot discretize an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw InputError("constant column has undefined quantiles");

  const double span = static_cast<double>(sorted.size() - 1);
  auto quantile = [&](int k) {
    const double h = span * k / 3.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
    const double a = sorted[lo];
    const double b = sorted[lo + 1];
    double q = a + frac * (b - a);
    // Keep the cut strictly below the next order statistic so bins follow ranks.
    if (q >= b && a < b) q = std::nextafter(b, a);
    return q;
  };
  return {quantile(1), quantile(2)};
}

std::uint8_t classify(double value, const Thresholds& cuts) {
  if (value <= cuts.lower) return 0;
  if (value <= cuts.upper) return 1;
  return 2;
}

DiscretePanel discretize(const TimePanel& panel) {
  if (panel.kind == SeriesKind::prices) throw InputError("discretize expects returns or residuals, got prices");
  panel.validate();
  DiscretePanel out;
  out.dates = panel.dates;
  out.names = panel.names;
  out.states.assign(panel.cols(), ternary_states());
  for (std::size_t c = 0; c < panel.cols(); ++c) {
    const auto& column = panel.columns[c];
    Thresholds cuts;
    try {
      cuts = tertile_cuts(column);
    } catch (const InputError& e) {
      throw InputError("column " + panel.names[c] + ": " + e.what());
    }
    std::vector<std::uint8_t> codes(column.size());
    std::transform(column.begin(), column.end(), codes.begin(), [&](double v) { return classify(v, cuts); });
    out.codes.push_back(std::move(codes));
    out.thresholds[panel.names[c]] = cuts;
  }
  return out;
}

void write_discrete_csv(std::ostream& out, const DiscretePanel& panel) {
  const bool dated = !panel.dates.empty();
  if (dated) out << "date";
  for (std::size_t c = 0; c < panel.cols(); ++c) out << (c == 0 && !dated ? "" : ",") << panel.names[c];
  out << '\n';
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    if (dated) out << panel.dates[r];
    for (std::size_t c = 0; c < panel.cols(); ++c)
      out << (c == 0 && !dated ? "" : ",") << panel.states[c][panel.codes[c][r]];
    out << '\n';
  }
}

DiscretePanel read_discrete_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  std::string line;
  if (!std::getline(in, line)) throw InputError("empty discrete panel CSV");
  auto header = split(line);
  const bool dated = !header.empty() && header.front() == "date";
  DiscretePanel panel;
  panel.names.assign(header.begin() + (dated ? 1 : 0), header.end());
  if (panel.names.empty()) throw InputError("discrete panel CSV has no variable columns");
  std::vector<std::vector<std::string>> labels(panel.names.size());

  std::size_t row = 1;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw InputError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells");
    if (dated) panel.dates.push_back(cells[0]);
    for (std::size_t c = 0; c < panel.names.size(); ++c) labels[c].push_back(cells[c + (dated ? 1 : 0)]);
    ++row;
  }

  const auto& ternary = ternary_states();
  for (std::size_t c = 0; c < panel.names.size(); ++c) {
    std::vector<std::string> states;
    const bool is_ternary = std::all_of(labels[c].begin(), labels[c].end(), [&](const std::string& s) {
      return std::find(ternary.begin(), ternary.end(), s) != ternary.end();
    });
    if (is_ternary) {
      states = ternary;
    } else {
      for (const auto& s : labels[c])
        if (std::find(states.begin(), states.end(), s) == states.end()) states.push_back(s);
    }
    std::vector<std::uint8_t> codes;
    codes.reserve(labels[c].size());
    for (const auto& s : labels[c])
      codes.push_back(static_cast<std::uint8_t>(std::find(states.begin(), states.end(), s) - states.begin()));
    panel.states.push_back(std::move(states));
    panel.codes.push_back(std::move(codes));
  }
  panel.validate();
  return panel;
}

DiscretePanel read_discrete_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return read_discrete_csv(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace carbonbn
