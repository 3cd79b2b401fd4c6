#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace carbonbn {

enum class SeriesKind { prices, log_returns, residuals };

std::string_view to_string(SeriesKind kind);

/// Daily observations for a set of named instruments, aligned on a common
/// date index. Every column has exactly dates.size() values and no gaps.
struct TimePanel {
  std::vector<std::string> dates;  // ISO-8601, strictly increasing
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  SeriesKind kind = SeriesKind::prices;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return names.size(); }
  std::size_t column_index(std::string_view name) const;
  const std::vector<double>& column(std::string_view name) const;

  /// Throws InputError if the shape or date invariants are broken.
  void validate() const;
};

/// Selects a subset of CSV columns, in the given order. Empty selects all.
struct PanelSchema {
  std::vector<std::string> columns;
};

/// Parses `date,<ticker>...` CSV. Blank cells are forward-filled and rows
/// before the latest first observation of any column are dropped.
TimePanel load_panel(std::istream& csv, const PanelSchema& schema = {});
TimePanel load_panel_file(const std::string& path, const PanelSchema& schema = {});

/// Carries the last observed value forward; leading gaps stay empty.
std::vector<std::optional<double>> forward_fill(std::span<const std::optional<double>> values);

/// ln(p_t / p_{t-1}) per column. Result has one row fewer; dates start at day 2.
TimePanel to_log_returns(const TimePanel& prices);

/// True iff `text` is a valid calendar date in YYYY-MM-DD form.
bool is_iso_date(std::string_view text);

}  // namespace carbonbn
