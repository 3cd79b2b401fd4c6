#include "carbonbn/data_prep.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "carbonbn/errors.hpp"

namespace carbonbn {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      cells.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::string_view to_string(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::prices: return "prices";
    case SeriesKind::log_returns: return "log_returns";
    case SeriesKind::residuals: return "residuals";
  }
  return "unknown";
}

std::size_t TimePanel::column_index(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InputError("unknown column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

const std::vector<double>& TimePanel::column(std::string_view name) const {
  return columns[column_index(name)];
}

void TimePanel::validate() const {
  if (columns.size() != names.size()) throw InputError("panel has mismatched column names");
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].size() != dates.size())
      throw InputError("column '" + names[c] + "' length differs from date index");
    for (double v : columns[c])
      if (!std::isfinite(v)) throw InputError("column '" + names[c] + "' has a non-finite value");
  }
  for (std::size_t r = 1; r < dates.size(); ++r)
    if (!(dates[r - 1] < dates[r])) throw InputError("dates not strictly increasing at row " + std::to_string(r));
}

bool is_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  auto digits = [](std::string_view s, auto& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  };
  if (!digits(text.substr(0, 4), y) || !digits(text.substr(5, 2), m) || !digits(text.substr(8, 2), d))
    return false;
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

std::vector<std::optional<double>> forward_fill(std::span<const std::optional<double>> values) {
  std::vector<std::optional<double>> out(values.begin(), values.end());
  std::optional<double> last;
  for (auto& v : out) {
    if (v) {
      last = v;
    } else {
      v = last;
    }
  }
  return out;
}

TimePanel load_panel(std::istream& csv, const PanelSchema& schema) {
  std::string line;
  if (!std::getline(csv, line)) throw InputError("empty CSV input");
  const auto header = split_csv_line(line);
  if (header.size() < 2) throw InputError("CSV header needs a date column and at least one series");

  std::vector<std::string> all_names;
  for (std::size_t c = 1; c < header.size(); ++c) all_names.emplace_back(trim(header[c]));

  std::vector<std::size_t> selected;
  if (schema.columns.empty()) {
    for (std::size_t c = 0; c < all_names.size(); ++c) selected.push_back(c);
  } else {
    for (const auto& name : schema.columns) {
      auto it = std::find(all_names.begin(), all_names.end(), name);
      if (it == all_names.end()) throw InputError("column '" + name + "' not found in CSV header");
      selected.push_back(static_cast<std::size_t>(it - all_names.begin()));
    }
  }

  std::vector<std::string> dates;
  std::vector<std::vector<std::optional<double>>> raw(selected.size());
  std::size_t line_no = 1;  // file line number; the header is line 1
  while (std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    const std::string where = "line " + std::to_string(line_no);
    std::string date{trim(cells[0])};
    if (!is_iso_date(date)) throw InputError(where + ", column date: unparseable date '" + date + "'");
    if (!dates.empty()) {
      if (date == dates.back()) throw InputError(where + ": duplicate date " + date);
      if (date < dates.back()) throw InputError(where + ": date " + date + " is not after " + dates.back());
    }
    if (cells.size() > header.size()) throw InputError(where + ": more cells than header columns");
    dates.push_back(std::move(date));
    for (std::size_t s = 0; s < selected.size(); ++s) {
      const std::size_t c = selected[s] + 1;
      std::string_view cell = c < cells.size() ? trim(cells[c]) : std::string_view{};
      if (cell.empty()) {
        raw[s].push_back(std::nullopt);
        continue;
      }
      auto value = parse_number(cell);
      if (!value)
        throw InputError(where + ", column " + all_names[selected[s]] + ": unparseable number '" +
                         std::string(cell) + "'");
      raw[s].push_back(value);
    }
  }
  if (dates.empty()) throw InputError("CSV has no data rows");

  // Drop rows until every selected instrument has been observed at least once.
  std::size_t start = 0;
  for (std::size_t s = 0; s < raw.size(); ++s) {
    auto first = std::find_if(raw[s].begin(), raw[s].end(), [](const auto& v) { return v.has_value(); });
    if (first == raw[s].end())
      throw InputError("column " + all_names[selected[s]] + " has no observations");
    start = std::max(start, static_cast<std::size_t>(first - raw[s].begin()));
  }

  TimePanel panel;
  panel.kind = SeriesKind::prices;
  panel.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(start), dates.end());
  for (std::size_t s = 0; s < raw.size(); ++s) {
    auto filled = forward_fill(raw[s]);
    std::vector<double> column;
    column.reserve(filled.size() - start);
    for (std::size_t r = start; r < filled.size(); ++r) column.push_back(*filled[r]);
    panel.names.push_back(all_names[selected[s]]);
    panel.columns.push_back(std::move(column));
  }
  return panel;
}

TimePanel load_panel_file(const std::string& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return load_panel(in, schema);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

TimePanel to_log_returns(const TimePanel& prices) {
  if (prices.kind != SeriesKind::prices) throw InputError("to_log_returns expects a price panel");
  if (prices.rows() < 2) throw InputError("need at least two price rows to form returns");
  TimePanel out;
  out.kind = SeriesKind::log_returns;
  out.names = prices.names;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  for (std::size_t c = 0; c < prices.cols(); ++c) {
    const auto& p = prices.columns[c];
    for (std::size_t r = 0; r < p.size(); ++r)
      if (!(p[r] > 0.0))
        throw InputError("non-positive price " + std::to_string(p[r]) + " at " + prices.dates[r] + ", column " +
                         prices.names[c]);
    std::vector<double> r(p.size() - 1);
    for (std::size_t t = 1; t < p.size(); ++t) r[t - 1] = std::log(p[t] / p[t - 1]);
    out.columns.push_back(std::move(r));
  }
  return out;
}

}  // namespace carbonbn
