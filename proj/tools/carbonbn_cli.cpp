#include <csignal>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "carbonbn/errors.hpp"
#include "carbonbn/pipeline.hpp"
#include "carbonbn/service.hpp"

namespace {

constexpr int kInputError = 2;
constexpr int kNumericalError = 3;

carbonbn::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace carbonbn;
  CLI::App app{"carbonbn: Bayesian-network analysis of daily market shocks"};
  app.set_config("--config", "", "flat key=value settings file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  PipelineConfig cfg;
  std::string threshold_mode = "undirected";
  std::string two_slice;
  std::string host = "127.0.0.1";
  std::string dot_path;
  int port = 8080;

  app.add_option("--input", cfg.input, "raw price CSV (date,<ticker>...)");
  app.add_option("--out", cfg.output_dir, "output directory")->capture_default_str();
  app.add_option("--model", cfg.model, "model JSON (default <out>/model.json)");
  app.add_option("--two-slice", two_slice, "two-slice model JSON for serve");
  app.add_option("--target", cfg.target, "target node");
  app.add_option("--seed", cfg.seed, "64-bit seed")->capture_default_str();
  app.add_option("--max-lag", cfg.grid.max_lag, "largest AR order")->capture_default_str();
  app.add_option("--max-p", cfg.grid.max_p, "largest ARCH order")->capture_default_str();
  app.add_option("--max-q", cfg.grid.max_q, "largest GARCH order")->capture_default_str();
  app.add_option("--scale", cfg.scale, "return scale factor before filtering")->capture_default_str();
  app.add_option("--resamples", cfg.resamples, "bootstrap resamples")->capture_default_str();
  app.add_option("--threshold", cfg.threshold, "consensus edge threshold")->capture_default_str();
  app.add_option("--threshold-mode", threshold_mode, "undirected or directed")
      ->check(CLI::IsMember({"undirected", "directed"}))
      ->capture_default_str();
  app.add_option("--ess", cfg.ess, "BDeu equivalent sample size")->capture_default_str();
  app.add_option("--tabu-tenure", cfg.tabu_tenure)->capture_default_str();
  app.add_option("--max-no-improve", cfg.max_no_improve)->capture_default_str();
  app.add_option("--max-in-degree", cfg.max_in_degree)->capture_default_str();
  app.add_option("--threads", cfg.threads, "bootstrap worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--dbn-single-run", cfg.dbn_single_run, "learn transitions with one search instead of bootstrap");
  app.add_option("--shock", cfg.shocks, "node=state shock for the temporal report (repeatable)");
  app.add_option("--top-k", cfg.tornado_top_k, "tornado entries per target state")->capture_default_str();
  app.add_option("--delta", cfg.tornado_delta, "tornado perturbation step")->capture_default_str();
  app.add_flag("--include-neutral", cfg.include_neutral, "sweep Neutral evidence too");
  app.add_flag("--mi-percent", cfg.mi_percent, "report mutual information times 100");
  app.add_flag("--whole-row-diameter", cfg.whole_row_diameter, "arc diameter over all row pairs");
  app.add_option("--host", host, "serve: bind address")->capture_default_str();
  app.add_option("--port", port, "serve: TCP port")->capture_default_str();
  app.add_option("--dot", dot_path, "export-dot: output file (stdout when omitted)");

  auto* prep = app.add_subcommand("prep", "filter and discretize the price panel");
  auto* learn = app.add_subcommand("learn", "bootstrap structure learning and MLE fit");
  auto* analyze = app.add_subcommand("analyze", "MPE, evidence sweep, sensitivity and tornado reports");
  auto* dbn = app.add_subcommand("dbn", "learn the two-slice transition layer and temporal shocks");
  auto* serve = app.add_subcommand("serve", "HTTP API over a model");
  auto* export_dot = app.add_subcommand("export-dot", "Graphviz export with arc-strength widths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }
  cfg.threshold_mode = threshold_mode == "directed" ? ThresholdMode::directed : ThresholdMode::undirected;

  try {
    if (*prep) cmd_prep(cfg);
    else if (*learn) cmd_learn(cfg);
    else if (*analyze) cmd_analyze(cfg);
    else if (*dbn) cmd_dbn(cfg);
    else if (*export_dot) cmd_export_dot(cfg, dot_path);
    else if (*serve) {
      const std::string model = cfg.model.empty() ? (std::filesystem::path(cfg.output_dir) / kModelFile).string() : cfg.model;
      std::optional<TwoSliceNetwork> tsn;
      if (!two_slice.empty()) tsn = load_two_slice(two_slice);
      ModelHolder holder;
      holder.load(ModelSnapshot::build(load_network(model), std::move(tsn)));
      HttpServer server(holder);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::clog << "serving " << model << " on http://" << host << ":" << port << "/v1/\n";
      server.listen(host, port);
      g_server = nullptr;
    }
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
