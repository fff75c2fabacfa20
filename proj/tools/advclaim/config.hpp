#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advclaim/attacks/attack.hpp"
#include "advclaim/data/split.hpp"
#include "advclaim/data/synth.hpp"
#include "advclaim/ganrl/gan.hpp"
#include "advclaim/ganrl/rl.hpp"
#include "advclaim/metrics/metrics.hpp"
#include "advclaim/models/birecurrent.hpp"
#include "advclaim/models/margin.hpp"
#include "advclaim/models/tree_ensemble.hpp"

namespace advclaim::cli {

struct CsvSource {
  std::string path;
  std::string label_column = "fraud_reported";
  char delimiter = ',';
  std::vector<std::string> missing_tokens{""};
  std::vector<std::string> drop_columns;
  std::vector<std::string> categorical;
  std::vector<std::string> numeric;
};

struct DatasetSection {
  std::string source = "synth";  // "synth" or "csv"
  SynthConfig synth;
  CsvSource csv;
  SplitRatios split;
  std::uint64_t seed = 0;
};

struct ModelSection {
  std::string name;
  std::string family;  // birecurrent, tree_ensemble, knn, margin
  BiRecurrentParams birecurrent;
  TreeParams tree;
  std::size_t k = 5;
  MarginParams margin;
};

struct AttackSection {
  std::string name;
  AttackKind kind = AttackKind::fgsm;
  AttackConfig config;
  std::vector<double> epsilon_grid;
  double report_epsilon = 0.5;  // epsilon of the summary-table row
};

struct GanrlSection {
  std::string target;
  std::size_t latent_dim = kDefaultLatentWidth;
  GanConfig pretrain;
  RlConfig rl;
  std::size_t eval_batches = 100;
  std::size_t eval_batch_size = 32;
  std::size_t query_budget = 0;  // 0 = unlimited
};

struct ExplainSection {
  std::string model;
  std::size_t n_explained = 20;
  std::size_t n_permutations = 200;
  std::size_t background_size = 50;
  std::size_t top_k = 0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::string output_dir;
  DatasetSection dataset;
  std::vector<ModelSection> models;
  std::vector<AttackSection> attacks;
  GanrlSection ganrl;
  AsrMode asr_mode = AsrMode::sample_rate;
  ExplainSection explain;

  const ModelSection* find_model(const std::string& name) const;
};

// Every section is validated and unknown keys are rejected (ConfigError with
// the offending key path). Sections and seeds left out take defaults; a seed
// override replaces the global seed and every seed derived from it.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = {});

// Fully resolved form (all defaults filled in); its hash identifies the run.
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace advclaim::cli
