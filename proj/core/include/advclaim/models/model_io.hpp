#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "advclaim/models/classifier.hpp"

namespace advclaim {

struct ModelProvenance {
  std::string name;
  std::string dataset_hash;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct LoadedModel {
  std::unique_ptr<Classifier> model;
  ModelProvenance provenance;
  bool hash_mismatch = false;
};

std::string serialize_model(const Classifier& model, const ModelProvenance& provenance);
void save_model(const Classifier& model, const ModelProvenance& provenance, const std::filesystem::path& path);

// A snapshot hash that differs from the one recorded at training time throws
// SchemaError, unless allow_mismatch is set, in which case the returned
// hash_mismatch flag is raised instead. An empty expected hash skips the check.
LoadedModel load_model(const std::filesystem::path& path, const std::string& expected_dataset_hash = {},
                       bool allow_mismatch = false);

}  // namespace advclaim
