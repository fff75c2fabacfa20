#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advclaim/data/dataset.hpp"

namespace advclaim {

struct SplitRatios {
  double train = 0.75;
  double val = 0.05;
  double test = 0.20;
};

struct SplitResult {
  SplitIndices indices;
  std::vector<std::string> warnings;
};

// Label-stratified split. Validation and test sizes are floor(n * ratio);
// the remainder goes to train. Per-class quotas use largest remainders so
// every split is within one sample of proportional per class.
SplitResult stratified_split(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed);

// Replaces ds.split and appends any stratification warnings.
void split(Dataset& ds, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace advclaim
