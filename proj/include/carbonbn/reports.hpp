#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "carbonbn/dbn.hpp"
#include "carbonbn/garch.hpp"
#include "carbonbn/inference.hpp"
#include "carbonbn/model_io.hpp"
#include "carbonbn/sensitivity.hpp"
#include "carbonbn/structure.hpp"

namespace carbonbn {

// CSV layouts. Numbers use up to 12 significant digits.

/// One row per instrument: lag, p, q and BIC under both filter modes.
void write_filter_table(std::ostream& out, const std::vector<FilterModel>& ar_garch,
                        const std::vector<FilterModel>& garch_only);
void write_thresholds(std::ostream& out, const DiscretePanel& panel);
void write_edge_frequencies(std::ostream& out, const std::vector<std::string>& nodes,
                            const std::vector<EdgeFrequency>& freqs);

/// Rows are non-target nodes, one column per conditioning target state.
void write_mpe_table(std::ostream& out, const std::string& target, const std::vector<std::string>& target_states,
                     const std::vector<MpeResult>& results);
/// Baseline row first, then one row per (node, state) in table order.
void write_sweep_table(std::ostream& out, const SweepTable& table);
/// With `mi_percent`, mutual information is reported times 100.
void write_sensitivity_table(std::ostream& out, const SensitivityReport& report, bool mi_percent);
void write_diameter_table(std::ostream& out, const SensitivityReport& report);
void write_tornado(std::ostream& out, const std::string& target, const std::string& state,
                   const std::vector<TornadoEntry>& entries);

struct TemporalShock {
  std::string node;
  std::string state;
  TemporalReport report;
};
void write_temporal_table(std::ostream& out, const std::string& target, const std::vector<std::string>& states,
                          const std::vector<TemporalShock>& shocks);

// JSON bodies shared by the CLI and the HTTP service.

Json to_json(const PosteriorReport& report);
Json to_json(const MpeResult& result);
Json to_json(const SensitivityReport& report);
Json to_json(const std::vector<TornadoEntry>& entries);
Json to_json(const TemporalReport& report);

}  // namespace carbonbn
