#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "advclaim/numkit/matrix.hpp"

namespace advclaim {

enum class FeatureKind { numeric, categorical };

const char* to_string(FeatureKind kind) noexcept;
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureMeta {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  // Categorical only: sorted, unique. Code i <-> categories[i]; code
  // categories.size() is reserved for values never seen during fitting.
  std::vector<std::string> categories;
  // Raw-unit range used for min-max scaling. For categoricals this is the
  // code range [0, categories.size()] so the unknown code maps to 1.
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;  // numeric imputation value

  std::size_t unknown_code() const noexcept { return categories.size(); }
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

enum class SplitPart { train, val, test };

struct Dataset {
  Matrix features;          // n_samples x n_features, normalized to [0, 1]
  std::vector<int> labels;  // 1 = fraud
  std::vector<FeatureMeta> meta;
  SplitIndices split;
  std::uint64_t seed = 0;
  std::string source;
  std::vector<std::string> warnings;

  std::size_t n_samples() const noexcept { return features.rows(); }
  std::size_t n_features() const noexcept { return features.cols(); }

  const std::vector<std::size_t>& indices(SplitPart part) const;
  Matrix part_features(SplitPart part) const;
  std::vector<int> part_labels(SplitPart part) const;
  std::vector<std::string> feature_names() const;
};

// Throws SchemaError when the dataset breaks its invariants: label domain,
// [0,1] features, disjoint and exhaustive split sets, meta width.
void validate(const Dataset& ds);

}  // namespace advclaim
