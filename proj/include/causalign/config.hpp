#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "causalign/encoder.hpp"
#include "causalign/synthetic.hpp"
#include "causalign/train_config.hpp"

namespace causalign {

struct PathsConfig {
  std::string data_dir = "synth";          // generated corpus location
  std::string manifest;                    // defaults to <data_dir>/manifest.tsv
  bool generate_if_missing = true;
  std::string out_dir = "run";

  std::filesystem::path manifest_path() const;
};

struct AblationConfig {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  // Optional (lambda_aug, lambda_sup) grid evaluated after the four rows.
  std::vector<double> lambda_aug_grid;
  std::vector<double> lambda_sup_grid;
};

/// Everything one experiment needs. Parsed from a JSON document whose keys
/// mirror the member names; absent keys keep these defaults.
struct RunConfig {
  SynthSpec data;
  EncoderArch model;
  TrainConfig train;
  PathsConfig paths;
  AblationConfig ablate;

  /// Collects every problem; throws a single ValidationError listing all.
  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

/// Keeps encoder input shape in sync with the corpus.
EncoderArch arch_for(const RunConfig& config);

/// Derives the corpus seed (stream 1) and training seed (stream 2) from one run seed.
void apply_run_seed(RunConfig& config, std::uint64_t seed);

}  // namespace causalign
