#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/models/classifier.hpp"
#include "advclaim/numkit/matrix.hpp"

namespace advclaim {

// Batch of rows -> one score per row. Must be safe to call concurrently.
using ScoreFn = std::function<std::vector<double>(ConstMatrixView)>;

ScoreFn score_fn(const Classifier& model);

struct FeatureAttribution {
  std::string name;
  double value = 0.0;      // signed Shapley estimate
  double std_error = 0.0;  // Monte-Carlo standard error of `value`
};

struct AttributionResult {
  std::vector<FeatureAttribution> per_feature;
  double base_value = 0.0;  // mean score over the whole background set
  double score = 0.0;       // score of the explained row
  std::size_t n_permutations = 0;
  std::uint64_t seed = 0;
  // Standard error of sum(values) as an estimate of score - base_value.
  double sum_std_error = 0.0;

  double sum() const;
};

// Each sampled permutation starts from one background row (drawn with the
// permutation) and switches features to x's values in permutation order;
// each score change is credited to the feature just switched.
AttributionResult mc_shapley(const ScoreFn& f, std::span<const double> x, const Matrix& background,
                             std::size_t n_permutations, std::uint64_t seed,
                             const std::vector<std::string>& feature_names = {});

struct ImportanceEntry {
  std::string feature;
  double mean_abs_shapley = 0.0;
  std::size_t rank = 0;  // 1 = most important
};

// Mean |Shapley| over n_explained test rows against a background of up to
// background_size seeded training rows; sorted descending (ties by column).
std::vector<ImportanceEntry> global_importance(const ScoreFn& f, const Dataset& ds, std::size_t n_explained,
                                               std::size_t n_permutations, std::uint64_t seed,
                                               std::size_t background_size = 50);

// `feature,mean_abs_shapley,rank`; top_k 0 keeps every row.
std::string importance_csv(std::span<const ImportanceEntry> entries, std::size_t top_k = 0);

}  // namespace advclaim
