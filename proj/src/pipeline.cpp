#include "carbonbn/pipeline.hpp"

#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "carbonbn/dbn.hpp"
#include "carbonbn/discrete.hpp"
#include "carbonbn/errors.hpp"
#include "carbonbn/reports.hpp"
#include "carbonbn/sensitivity.hpp"

namespace carbonbn {

namespace fs = std::filesystem;

namespace {

std::string out_path(const PipelineConfig& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " not found: " + path);
}

/// Records config, seed and SHA-256 digests of everything read and written.
class Manifest {
 public:
  Manifest(std::string command, const PipelineConfig& config) : command_(std::move(command)), config_(config) {}
  void input(const std::string& path) { inputs_[path] = sha256_file(path); }
  void output(const std::string& path) {
    outputs_[fs::path(path).filename().string()] = sha256_file(path);
  }
  void write() const {
    Json doc;
    doc["command"] = command_;
    doc["seed"] = config_.seed;
    doc["config"] = config_.to_json();
    doc["inputs"] = inputs_;
    doc["outputs"] = outputs_;
    write_json_file(out_path(config_, "manifest_" + command_ + ".json"), doc);
  }

 private:
  std::string command_;
  const PipelineConfig& config_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

std::string model_path(const PipelineConfig& c) { return c.model.empty() ? out_path(c, kModelFile) : c.model; }

std::string checked_target(const PipelineConfig& c, const BayesianNetwork& net) {
  if (c.target.empty()) throw InputError("no target node configured (--target)");
  if (!net.dag().contains(c.target)) throw InputError("target " + c.target + " is not a model node");
  return c.target;
}

/// Panel restricted to and ordered like `names`.
DiscretePanel select_columns(const DiscretePanel& panel, const std::vector<std::string>& names) {
  DiscretePanel out;
  out.dates = panel.dates;
  for (const auto& n : names) {
    if (!panel.has_column(n)) throw InputError("panel has no column " + n);
    const auto c = panel.column_index(n);
    out.names.push_back(n);
    out.states.push_back(panel.states[c]);
    out.codes.push_back(panel.codes[c]);
    if (auto it = panel.thresholds.find(n); it != panel.thresholds.end()) out.thresholds.emplace(n, it->second);
  }
  return out;
}

SearchControls search_controls(const PipelineConfig& c) {
  SearchControls s;
  s.tabu_tenure = c.tabu_tenure;
  s.max_no_improve = c.max_no_improve;
  s.max_in_degree = c.max_in_degree;
  return s;
}

BootstrapOptions bootstrap_options(const PipelineConfig& c) {
  return BootstrapOptions{c.resamples, c.threshold, c.threshold_mode, c.threads};
}

std::string file_tag(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return out;
}

std::vector<std::pair<std::string, std::string>> shock_list(const PipelineConfig& c, const BayesianNetwork& net,
                                                            const std::string& target) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!c.shocks.empty()) {
    for (const auto& s : c.shocks) out.push_back(parse_assignment(s));
    return out;
  }
  for (std::size_t i = 0; i < net.size(); ++i) {
    if (net.name(i) == target) continue;
    const auto& st = net.states(i);
    bool any = false;
    for (const char* label : {"High", "Low"})
      if (std::find(st.begin(), st.end(), label) != st.end()) out.emplace_back(net.name(i), label), any = true;
    if (!any)
      for (const auto& s : st) out.emplace_back(net.name(i), s);
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (output_dir.empty()) throw InputError("output directory must be set");
  if (grid.max_lag < 0 || grid.max_p < 1 || grid.max_q < 1) throw InputError("filter grid bounds out of range");
  if (!(scale > 0.0)) throw InputError("scale must be positive");
  if (resamples < 1) throw InputError("resamples must be at least 1");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw InputError("threshold must lie in (0, 1]");
  if (!(ess > 0.0)) throw InputError("equivalent sample size must be positive");
  if (tabu_tenure < 0 || max_no_improve < 1 || max_in_degree < 0) throw InputError("tabu controls out of range");
  if (tornado_top_k < 1) throw InputError("tornado top_k must be at least 1");
  if (!(tornado_delta > 0.0 && tornado_delta <= 1.0)) throw InputError("tornado delta must lie in (0, 1]");
}

Json PipelineConfig::to_json() const {
  return {{"input", input},
          {"output_dir", output_dir},
          {"model", model},
          {"target", target},
          {"seed", seed},
          {"max_lag", grid.max_lag},
          {"max_p", grid.max_p},
          {"max_q", grid.max_q},
          {"scale", scale},
          {"resamples", resamples},
          {"threshold", threshold},
          {"threshold_mode", threshold_mode == ThresholdMode::undirected ? "undirected" : "directed"},
          {"ess", ess},
          {"tabu_tenure", tabu_tenure},
          {"max_no_improve", max_no_improve},
          {"max_in_degree", max_in_degree},
          {"dbn_single_run", dbn_single_run},
          {"shocks", shocks},
          {"tornado_top_k", tornado_top_k},
          {"tornado_delta", tornado_delta},
          {"include_neutral", include_neutral},
          {"mi_percent", mi_percent},
          {"whole_row_diameter", whole_row_diameter}};
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("SHA-256 digest failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return out.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw InputError("expected node=state, got \"" + text + "\"");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

void cmd_prep(const PipelineConfig& config) {
  config.validate();
  if (config.input.empty()) throw InputError("no input price file configured (--input)");
  require_file(config.input, "input price file");
  fs::create_directories(config.output_dir);
  Manifest manifest("prep", config);
  manifest.input(config.input);

  const TimePanel prices = load_panel_file(config.input);
  const TimePanel returns = to_log_returns(prices);

  std::vector<FilterModel> fitted[2];
  const FilterMode modes[2] = {FilterMode::ar_garch, FilterMode::garch_only};
  const char* panels[2] = {kArGarchPanel, kGarchOnlyPanel};
  for (int k = 0; k < 2; ++k) {
    FilterOptions opt;
    opt.mode = modes[k];
    opt.grid = config.grid;
    opt.scale = config.scale;
    FilteredPanel filtered = filter_panel(returns, opt);
    const DiscretePanel disc = discretize(filtered.residuals);
    fitted[k] = std::move(filtered.models);

    const auto panel_path = out_path(config, panels[k]);
    {
      auto out = open_out(panel_path);
      write_discrete_csv(out, disc);
    }
    manifest.output(panel_path);
    const auto thr_path = out_path(config, "thresholds_" + std::string(to_string(modes[k])) + ".csv");
    {
      auto out = open_out(thr_path);
      write_thresholds(out, disc);
    }
    manifest.output(thr_path);
  }
  const auto table_path = out_path(config, "filter_table.csv");
  {
    auto out = open_out(table_path);
    write_filter_table(out, fitted[0], fitted[1]);
  }
  manifest.output(table_path);
  manifest.write();
}

void cmd_learn(const PipelineConfig& config) {
  config.validate();
  const auto panel_path = out_path(config, kArGarchPanel);
  require_file(panel_path, "discretized panel (run prep first)");
  Manifest manifest("learn", config);
  manifest.input(panel_path);
  const DiscretePanel panel = read_discrete_csv_file(panel_path);

  const BDeuConfig score{config.ess};
  const auto consensus = bootstrap_consensus(panel, score, search_controls(config), bootstrap_options(config), config.seed);
  LearningMetadata meta;
  meta.seed = config.seed;
  meta.resamples = config.resamples;
  meta.threshold = config.threshold;
  meta.ess = config.ess;
  meta.provenance = "bootstrap consensus on " + std::string(kArGarchPanel);
  const BayesianNetwork net = fit_mle(consensus.dag, panel, meta);

  const auto model_out = out_path(config, kModelFile);
  write_json_file(model_out, network_to_json(net));
  manifest.output(model_out);

  const auto freq_path = out_path(config, "edge_frequencies.csv");
  {
    auto out = open_out(freq_path);
    write_edge_frequencies(out, net.nodes(), consensus.frequencies);
  }
  manifest.output(freq_path);

  const auto cpdag_path = out_path(config, "cpdag.json");
  write_json_file(cpdag_path, pdag_to_json(cpdag(net.dag())));
  manifest.output(cpdag_path);

  std::map<std::pair<std::string, std::string>, double> diam;
  for (auto [p, c] : net.dag().edges())
    diam[{net.name(p), net.name(c)}] = arc_diameter(net, net.name(p), net.name(c), config.whole_row_diameter);
  const auto dot_path = out_path(config, "network.dot");
  {
    auto out = open_out(dot_path);
    out << to_dot(net, diam);
  }
  manifest.output(dot_path);
  manifest.write();
}

void cmd_analyze(const PipelineConfig& config) {
  config.validate();
  const auto mpath = model_path(config);
  require_file(mpath, "model");
  fs::create_directories(config.output_dir);
  Manifest manifest("analyze", config);
  manifest.input(mpath);
  const BayesianNetwork net = load_network(mpath);
  const auto target = checked_target(config, net);
  const auto& states = net.states(net.index(target));

  std::vector<MpeResult> mpes;
  Json mpe_doc = Json::array();
  for (const auto& s : states) {
    mpes.push_back(mpe(net, {{target, s}}));
    mpe_doc.push_back(to_json(mpes.back()));
  }
  const auto mpe_csv = out_path(config, "mpe.csv");
  {
    auto out = open_out(mpe_csv);
    write_mpe_table(out, target, states, mpes);
  }
  manifest.output(mpe_csv);
  const auto mpe_json = out_path(config, "mpe.json");
  write_json_file(mpe_json, mpe_doc);
  manifest.output(mpe_json);

  SweepOptions sweep_opt;
  sweep_opt.include_neutral = config.include_neutral;
  const auto sweep_csv = out_path(config, "sweep.csv");
  {
    auto out = open_out(sweep_csv);
    write_sweep_table(out, evidence_sweep(net, target, sweep_opt));
  }
  manifest.output(sweep_csv);

  const auto report = sensitivity_report(net, target, config.whole_row_diameter);
  const auto sens_csv = out_path(config, "sensitivity.csv");
  {
    auto out = open_out(sens_csv);
    write_sensitivity_table(out, report, config.mi_percent);
  }
  manifest.output(sens_csv);
  const auto diam_csv = out_path(config, "diameters.csv");
  {
    auto out = open_out(diam_csv);
    write_diameter_table(out, report);
  }
  manifest.output(diam_csv);
  const auto sens_json = out_path(config, "sensitivity.json");
  write_json_file(sens_json, to_json(report));
  manifest.output(sens_json);

  TornadoOptions topt;
  topt.delta = config.tornado_delta;
  topt.top_k = config.tornado_top_k;
  for (const auto& s : states) {
    const auto path = out_path(config, "tornado_" + file_tag(s) + ".csv");
    auto out = open_out(path);
    write_tornado(out, target, s, tornado(net, target, s, topt));
    out.close();
    manifest.output(path);
  }
  manifest.write();
}

void cmd_dbn(const PipelineConfig& config) {
  config.validate();
  const auto mpath = model_path(config);
  const auto panel_path = out_path(config, kGarchOnlyPanel);
  require_file(mpath, "model");
  require_file(panel_path, "GARCH-only panel (run prep first)");
  Manifest manifest("dbn", config);
  manifest.input(mpath);
  manifest.input(panel_path);

  const BayesianNetwork learned = load_network(mpath);
  const auto target = checked_target(config, learned);
  const auto shocks = shock_list(config, learned, target);
  for (const auto& [node, state] : shocks) {
    if (!learned.dag().contains(node)) throw InputError("shock on unknown node " + node);
    learned.state_index(learned.index(node), state);
  }
  const DiscretePanel panel = select_columns(read_discrete_csv_file(panel_path), learned.nodes());

  // Same slice-T structure, parameters refit on the GARCH-only residuals.
  LearningMetadata meta = learned.metadata();
  meta.provenance = "structure from " + fs::path(mpath).filename().string() + ", CPTs refit on " + kGarchOnlyPanel;
  const BayesianNetwork static_net = fit_mle(learned.dag(), panel, meta);

  TransitionLearning opts;
  opts.score = BDeuConfig{config.ess};
  opts.controls = search_controls(config);
  opts.bootstrap = bootstrap_options(config);
  opts.single_run = config.dbn_single_run;
  const TwoSliceNetwork tsn = learn_transitions(panel, static_net, opts, config.seed);

  const auto tsn_path = out_path(config, kTwoSliceFile);
  write_json_file(tsn_path, two_slice_to_json(tsn));
  manifest.output(tsn_path);

  std::vector<TemporalShock> rows;
  rows.push_back({"(none)", "", temporal_query(tsn, {}, target)});
  for (const auto& [node, state] : shocks) {
    try {
      rows.push_back({node, state, temporal_query(tsn, {{node, state}}, target)});
    } catch (const ZeroProbabilityEvidence&) {
      std::clog << "skipping shock " << node << "=" << state << ": zero probability\n";
    }
  }
  const auto table_path = out_path(config, "temporal.csv");
  {
    auto out = open_out(table_path);
    write_temporal_table(out, target, tsn.static_net.states(tsn.static_net.index(target)), rows);
  }
  manifest.output(table_path);
  manifest.write();
}

void cmd_export_dot(const PipelineConfig& config, const std::string& path) {
  const auto mpath = model_path(config);
  require_file(mpath, "model");
  const BayesianNetwork net = load_network(mpath);
  std::map<std::pair<std::string, std::string>, double> diam;
  for (auto [p, c] : net.dag().edges())
    diam[{net.name(p), net.name(c)}] = arc_diameter(net, net.name(p), net.name(c), config.whole_row_diameter);
  const auto dot = to_dot(net, diam);
  if (path.empty()) {
    std::cout << dot;
    return;
  }
  auto out = open_out(path);
  out << dot;
}

}  // namespace carbonbn
