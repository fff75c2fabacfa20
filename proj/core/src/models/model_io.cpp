#include "advclaim/models/model_io.hpp"

#include "advclaim/errors.hpp"
#include "advclaim/io.hpp"

namespace advclaim {

std::string serialize_model(const Classifier& model, const ModelProvenance& provenance) {
  nlohmann::json doc = model.to_json();
  doc["format"] = "advclaim-model";
  doc["name"] = provenance.name;
  doc["dataset_hash"] = provenance.dataset_hash;
  doc["training_seed"] = provenance.seed;
  doc["config_hash"] = provenance.config_hash;
  return doc.dump() + "\n";
}

void save_model(const Classifier& model, const ModelProvenance& provenance, const std::filesystem::path& path) {
  write_text_file(path, serialize_model(model, provenance));
}

LoadedModel load_model(const std::filesystem::path& path, const std::string& expected_dataset_hash,
                       bool allow_mismatch) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": not valid JSON: " + e.what());
  }
  LoadedModel out;
  try {
    if (doc.value("format", "") != "advclaim-model") throw SchemaError(path.string() + ": not an advclaim model");
    out.provenance.name = doc.at("name").get<std::string>();
    out.provenance.dataset_hash = doc.at("dataset_hash").get<std::string>();
    out.provenance.seed = doc.at("training_seed").get<std::uint64_t>();
    out.provenance.config_hash = doc.at("config_hash").get<std::string>();
    out.model = classifier_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": malformed model: " + e.what());
  }
  if (!expected_dataset_hash.empty() && expected_dataset_hash != out.provenance.dataset_hash) {
    if (!allow_mismatch) {
      throw SchemaError(path.string() + ": trained on snapshot " + out.provenance.dataset_hash +
                        " but the current snapshot is " + expected_dataset_hash);
    }
    out.hash_mismatch = true;
  }
  return out;
}

}  // namespace advclaim
