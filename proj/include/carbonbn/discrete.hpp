#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "carbonbn/data_prep.hpp"

namespace carbonbn {

/// State labels produced by discretize(), in code order.
inline const std::vector<std::string>& ternary_states() {
  static const std::vector<std::string> states{"Low", "Neutral", "High"};
  return states;
}

struct Thresholds {
  double lower = 0.0;  // values <= lower are Low
  double upper = 0.0;  // lower < value <= upper is Neutral, above is High
};

/// Per-day categorical states for a set of variables. Codes are stored
/// column-major; code k of column c is the label states[c][k].
struct DiscretePanel {
  std::vector<std::string> dates;  // optional, empty for synthetic data
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> states;
  std::vector<std::vector<std::uint8_t>> codes;
  std::map<std::string, Thresholds> thresholds;

  std::size_t rows() const { return codes.empty() ? 0 : codes.front().size(); }
  std::size_t cols() const { return names.size(); }
  std::size_t arity(std::size_t col) const { return states[col].size(); }
  std::size_t column_index(std::string_view name) const;
  bool has_column(std::string_view name) const;

  void validate() const;

  /// Builds a panel from integer codes; every column shares `labels`.
  static DiscretePanel from_codes(std::vector<std::string> names,
                                  std::vector<std::vector<std::uint8_t>> codes,
                                  const std::vector<std::string>& labels = ternary_states());
};

/// Empirical tertile cut points with linear interpolation between order statistics.
Thresholds tertile_cuts(std::span<const double> values);

/// Maps a value to its Low/Neutral/High code given the cut points.
std::uint8_t classify(double value, const Thresholds& cuts);

/// Three-bin quantile discretization of every column.
DiscretePanel discretize(const TimePanel& panel);

/// CSV with header `date,<name>...` (or just names when dates are absent) and state labels.
void write_discrete_csv(std::ostream& out, const DiscretePanel& panel);
DiscretePanel read_discrete_csv(std::istream& in);
DiscretePanel read_discrete_csv_file(const std::string& path);

}  // namespace carbonbn
