#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carbonbn/garch.hpp"
#include "carbonbn/inference.hpp"
#include "carbonbn/model_io.hpp"
#include "carbonbn/structure.hpp"

namespace carbonbn {

/// Settings shared by every pipeline command. Defaults follow the reference study.
struct PipelineConfig {
  std::string input;       // raw price CSV (prep)
  std::string output_dir = "out";
  std::string model;       // model JSON override for analyze / dbn / export-dot
  std::string target;
  std::uint64_t seed = 42;

  FilterGrid grid;
  double scale = 1000.0;

  int resamples = 200;
  double threshold = 0.5;
  ThresholdMode threshold_mode = ThresholdMode::undirected;
  double ess = 10.0;
  int tabu_tenure = 10;
  int max_no_improve = 15;
  int max_in_degree = 4;
  unsigned threads = 0;

  bool dbn_single_run = false;
  /// "node=state" shocks for the temporal report; empty means High and Low of every other node.
  std::vector<std::string> shocks;

  std::size_t tornado_top_k = 10;
  double tornado_delta = 0.05;
  bool include_neutral = false;
  bool mi_percent = false;
  bool whole_row_diameter = false;

  /// Throws InputError on out-of-range settings.
  void validate() const;
  Json to_json() const;
};

// File names inside output_dir.
inline constexpr const char* kArGarchPanel = "panel_ar_garch.csv";
inline constexpr const char* kGarchOnlyPanel = "panel_garch_only.csv";
inline constexpr const char* kModelFile = "model.json";
inline constexpr const char* kTwoSliceFile = "two_slice.json";

void cmd_prep(const PipelineConfig& config);
void cmd_learn(const PipelineConfig& config);
void cmd_analyze(const PipelineConfig& config);
void cmd_dbn(const PipelineConfig& config);
/// Writes the DOT graph of the model to `path` (stdout when empty).
void cmd_export_dot(const PipelineConfig& config, const std::string& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);
std::string sha256_hex(std::string_view bytes);

/// Parses "node=state" into an evidence pair.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

}  // namespace carbonbn
