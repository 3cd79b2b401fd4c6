#include "carbonbn/reports.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "carbonbn/errors.hpp"

namespace carbonbn {

namespace {

std::ostream& prec(std::ostream& out) { return out << std::setprecision(12); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

const FilterModel* find_model(const std::vector<FilterModel>& models, const std::string& name) {
  for (const auto& m : models)
    if (m.instrument == name) return &m;
  return nullptr;
}

void write_model_cells(std::ostream& out, const FilterModel* m) {
  if (!m) {
    out << ",,,,";
    return;
  }
  out << ',' << m->ar_order << ',' << m->garch_p << ',' << m->garch_q << ',' << m->bic;
}

}  // namespace

void write_filter_table(std::ostream& out, const std::vector<FilterModel>& ar_garch,
                        const std::vector<FilterModel>& garch_only) {
  prec(out) << "instrument,ar_garch_lag,ar_garch_p,ar_garch_q,ar_garch_bic,"
               "garch_only_lag,garch_only_p,garch_only_q,garch_only_bic\n";
  std::vector<std::string> names;
  for (const auto& m : ar_garch) names.push_back(m.instrument);
  for (const auto& m : garch_only)
    if (!find_model(ar_garch, m.instrument)) names.push_back(m.instrument);
  for (const auto& n : names) {
    out << csv_field(n);
    write_model_cells(out, find_model(ar_garch, n));
    write_model_cells(out, find_model(garch_only, n));
    out << '\n';
  }
}

void write_thresholds(std::ostream& out, const DiscretePanel& panel) {
  prec(out) << "variable,lower,upper\n";
  for (const auto& n : panel.names) {
    auto it = panel.thresholds.find(n);
    if (it == panel.thresholds.end()) continue;
    out << csv_field(n) << ',' << it->second.lower << ',' << it->second.upper << '\n';
  }
}

void write_edge_frequencies(std::ostream& out, const std::vector<std::string>& nodes,
                            const std::vector<EdgeFrequency>& freqs) {
  prec(out) << "from,to,undirected,forward,backward\n";
  for (const auto& f : freqs)
    out << csv_field(nodes.at(f.a)) << ',' << csv_field(nodes.at(f.b)) << ',' << f.undirected << ',' << f.forward << ','
        << f.backward << '\n';
}

void write_mpe_table(std::ostream& out, const std::string& target, const std::vector<std::string>& target_states,
                     const std::vector<MpeResult>& results) {
  if (results.size() != target_states.size()) throw InputError("one MPE result per target state expected");
  out << "variable";
  for (const auto& s : target_states) out << ',' << csv_field(target + "=" + s);
  out << '\n';
  if (results.empty()) return;
  for (const auto& [node, _] : results.front().assignment) {
    out << csv_field(node);
    for (const auto& r : results) out << ',' << csv_field(r.assignment.at(node));
    out << '\n';
  }
}

void write_sweep_table(std::ostream& out, const SweepTable& table) {
  prec(out) << "variable,state";
  for (const auto& s : table.target_states) out << ',' << csv_field("P(" + table.target + "=" + s + ")");
  out << ",tvd\n";
  out << "(none),";
  for (double p : table.baseline) out << ',' << p;
  out << ",0\n";
  for (const auto& row : table.rows) {
    out << csv_field(row.node) << ',' << csv_field(row.state);
    for (double p : row.distribution) out << ',' << p;
    out << ',' << row.tvd << '\n';
  }
}

void write_sensitivity_table(std::ostream& out, const SensitivityReport& report, bool mi_percent) {
  prec(out) << "variable,sobol,sobol_rank," << (mi_percent ? "mutual_information_x100" : "mutual_information")
            << ",mi_rank\n";
  for (const auto& n : report.nodes)
    out << csv_field(n.node) << ',' << n.sobol << ',' << n.sobol_rank << ','
        << (mi_percent ? 100.0 * n.mutual_information : n.mutual_information) << ',' << n.mi_rank << '\n';
}

void write_diameter_table(std::ostream& out, const SensitivityReport& report) {
  prec(out) << "from,to,diameter,rank\n";
  for (const auto& e : report.edges)
    out << csv_field(e.parent) << ',' << csv_field(e.child) << ',' << e.diameter << ',' << e.rank << '\n';
}

void write_tornado(std::ostream& out, const std::string& target, const std::string& state,
                   const std::vector<TornadoEntry>& entries) {
  prec(out) << "rank,output,node,parent_states,state,theta,baseline,sensitivity,direction,one_sided\n";
  std::size_t rank = 0;
  for (const auto& e : entries)
    out << ++rank << ',' << csv_field("P(" + target + "=" + state + ")") << ',' << csv_field(e.node) << ','
        << csv_field(e.parent_states) << ',' << csv_field(e.state) << ',' << e.theta << ',' << e.baseline_output << ','
        << e.sensitivity_value << ',' << e.direction << ',' << (e.one_sided ? 1 : 0) << '\n';
}

void write_temporal_table(std::ostream& out, const std::string& target, const std::vector<std::string>& states,
                          const std::vector<TemporalShock>& shocks) {
  prec(out) << "variable,state";
  for (const char* slice : {"T", "T+1"})
    for (const auto& s : states) out << ',' << csv_field(target + "@" + slice + "=" + s);
  out << '\n';
  for (const auto& shock : shocks) {
    out << csv_field(shock.node) << ',' << csv_field(shock.state);
    for (double p : shock.report.at_t.distribution) out << ',' << p;
    for (double p : shock.report.at_next.distribution) out << ',' << p;
    out << '\n';
  }
}

Json to_json(const PosteriorReport& report) {
  Json doc;
  doc["target"] = report.target;
  doc["states"] = report.states;
  doc["distribution"] = report.distribution;
  doc["evidence"] = report.evidence;
  return doc;
}

Json to_json(const MpeResult& result) {
  Json doc;
  doc["assignment"] = result.assignment;
  doc["evidence"] = result.evidence;
  doc["log_probability"] = result.log_probability;
  doc["log_evidence"] = result.log_evidence;
  doc["conditional_probability"] = std::exp(result.log_probability - result.log_evidence);
  return doc;
}

Json to_json(const SensitivityReport& report) {
  Json doc;
  doc["target"] = report.target;
  doc["nodes"] = Json::array();
  for (const auto& n : report.nodes)
    doc["nodes"].push_back({{"node", n.node},
                            {"mutual_information", n.mutual_information},
                            {"mi_rank", n.mi_rank},
                            {"sobol", n.sobol},
                            {"sobol_rank", n.sobol_rank}});
  doc["edges"] = Json::array();
  for (const auto& e : report.edges)
    doc["edges"].push_back({{"from", e.parent}, {"to", e.child}, {"diameter", e.diameter}, {"rank", e.rank}});
  return doc;
}

Json to_json(const std::vector<TornadoEntry>& entries) {
  Json doc = Json::array();
  for (const auto& e : entries)
    doc.push_back({{"node", e.node},
                   {"configuration", e.configuration},
                   {"parent_states", e.parent_states},
                   {"state", e.state},
                   {"theta", e.theta},
                   {"baseline", e.baseline_output},
                   {"sensitivity", e.sensitivity_value},
                   {"direction", e.direction},
                   {"one_sided", e.one_sided}});
  return doc;
}

Json to_json(const TemporalReport& report) { return {{"T", to_json(report.at_t)}, {"T+1", to_json(report.at_next)}}; }

}  // namespace carbonbn
