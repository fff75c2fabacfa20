#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advclaim/metrics/metrics.hpp"

namespace advclaim {

struct ModelRow {
  std::string model_id;
  std::string family;
  std::optional<ConfusionCounts> counts;
  std::uint64_t seed = 0;
  std::string error;  // training or evaluation failure, row otherwise empty
};

struct AttackRow {
  std::string model_id;
  std::string attack;
  double epsilon = 0.0;
  std::optional<double> accuracy_before;
  std::optional<double> accuracy_after;
  std::optional<double> asr;
  std::uint64_t seed = 0;
  std::string note;  // e.g. why the attack does not apply
};

struct MetricsReport {
  std::string kind;  // "models", "attacks", "gan_attack", ...
  std::string dataset_hash;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<ModelRow> models;
  std::vector<AttackRow> attacks;
  nlohmann::json extra = nlohmann::json::object();
};

// SOURCE_DATE_EPOCH rendered as UTC ISO-8601 when set, otherwise "unset",
// so identical runs produce identical files.
std::string report_timestamp();

nlohmann::json report_to_json(const MetricsReport& report);
// One CSV line per model row then per attack row; undefined values print as n/a.
std::string report_csv(const MetricsReport& report);

// Writes <stem>.json and <stem>.csv; IoError on failure.
void emit_report(const MetricsReport& report, const std::filesystem::path& stem);

}  // namespace advclaim
