#pragma once

#include <filesystem>
#include <string>

#include "advclaim/data/csv.hpp"
#include "advclaim/data/dataset.hpp"
#include "advclaim/data/encoding.hpp"
#include "advclaim/data/split.hpp"

namespace advclaim {

// Full ingestion: stratified split first, then encoding and normalization
// fitted on the train rows only.
Dataset prepare_csv_dataset(const RawTable& table, const EncodingOptions& options, const SplitRatios& ratios,
                            std::uint64_t seed);

// Self-describing JSON: schema, normalization stats, split indices, seed,
// labels and the normalized feature payload. Deterministic byte output.
std::string serialize_snapshot(const Dataset& ds);
Dataset parse_snapshot(const std::string& text);

std::string snapshot_hash(const Dataset& ds);

// Returns the content hash of the written file.
std::string save_snapshot(const Dataset& ds, const std::filesystem::path& path);

struct LoadedSnapshot {
  Dataset dataset;
  std::string hash;
};
LoadedSnapshot load_snapshot(const std::filesystem::path& path);

}  // namespace advclaim
