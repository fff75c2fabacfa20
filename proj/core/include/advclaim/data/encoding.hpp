#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "advclaim/data/csv.hpp"
#include "advclaim/data/dataset.hpp"

namespace advclaim {

struct EncodingOptions {
  // Columns not listed here are numeric when every present cell parses as a
  // number, categorical otherwise.
  std::map<std::string, FeatureKind> declared;
  std::vector<std::string> drop_columns;
};

struct EncodeReport {
  std::size_t unknown_categories = 0;
  std::size_t imputed_numeric = 0;
  std::size_t missing_categorical = 0;
};

// Fits the schema on `fit_rows` only: sorted category lists, numeric
// min/max/median. An all-missing column in the fit rows is a SchemaError.
std::vector<FeatureMeta> fit_encoding(const RawTable& table, std::span<const std::size_t> fit_rows,
                                      const EncodingOptions& options = {});

// Raw-unit matrix: numeric values (missing -> median) and category codes
// (unseen or missing -> unknown code). Counts land in `report`.
Matrix encode(const RawTable& table, const std::vector<FeatureMeta>& meta, EncodeReport& report);

std::size_t category_code(const FeatureMeta& meta, const std::string& value);

double normalize_value(const FeatureMeta& meta, double raw) noexcept;
double denormalize_value(const FeatureMeta& meta, double normalized) noexcept;

// Min-max scaling with clipping to [0, 1]; constant columns map to 0.
void normalize_inplace(Matrix& raw, const std::vector<FeatureMeta>& meta);

std::string decode_value(const FeatureMeta& meta, double normalized);
std::vector<std::string> decode_row(const std::vector<FeatureMeta>& meta, std::span<const double> row);

}  // namespace advclaim
