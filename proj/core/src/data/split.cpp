#include "advclaim/data/split.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

namespace {

// Distributes `total` over classes proportionally to `class_sizes` with
// largest-remainder rounding; ties go to the lower class index.
std::array<std::size_t, 2> apportion(std::size_t total, const std::array<std::size_t, 2>& class_sizes,
                                     std::size_t n) {
  std::array<std::size_t, 2> out{};
  std::array<double, 2> frac{};
  std::size_t assigned = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(total) * static_cast<double>(class_sizes[c]) / static_cast<double>(n);
    out[c] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[c] = exact - static_cast<double>(out[c]);
    assigned += out[c];
  }
  while (assigned < total) {
    const int c = frac[1] > frac[0] ? 1 : 0;
    const int pick = out[c] < class_sizes[c] ? c : 1 - c;
    ++out[pick];
    frac[pick] = -1.0;
    ++assigned;
  }
  return out;
}

}  // namespace

SplitResult stratified_split(std::span<const int> labels, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  const std::size_t n = labels.size();
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw SchemaError("labels must be 0 or 1");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  const std::array<std::size_t, 2> sizes{by_class[0].size(), by_class[1].size()};

  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.val + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test + 1e-9));
  const auto val_q = n ? apportion(n_val, sizes, n) : std::array<std::size_t, 2>{};
  const std::array<std::size_t, 2> remaining{sizes[0] - val_q[0], sizes[1] - val_q[1]};
  // Test quotas are apportioned on the full class sizes, capped by what is left.
  auto test_q = n ? apportion(n_test, sizes, n) : std::array<std::size_t, 2>{};
  for (int c = 0; c < 2; ++c) {
    if (test_q[c] > remaining[c]) {
      test_q[1 - c] += test_q[c] - remaining[c];
      test_q[c] = remaining[c];
    }
  }

  Rng rng(seed);
  SplitResult result;
  for (int c = 0; c < 2; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(std::span<std::size_t>(idx));
    std::size_t pos = 0;
    for (std::size_t k = 0; k < val_q[c]; ++k) result.indices.val.push_back(idx[pos++]);
    for (std::size_t k = 0; k < test_q[c]; ++k) result.indices.test.push_back(idx[pos++]);
    while (pos < idx.size()) result.indices.train.push_back(idx[pos++]);
  }
  for (auto* part : {&result.indices.train, &result.indices.val, &result.indices.test})
    std::sort(part->begin(), part->end());

  const char* names[] = {"train", "val", "test"};
  const std::array<std::array<std::size_t, 2>, 3> counts{
      std::array<std::size_t, 2>{sizes[0] - val_q[0] - test_q[0], sizes[1] - val_q[1] - test_q[1]}, val_q, test_q};
  for (int p = 0; p < 3; ++p) {
    for (int c = 0; c < 2; ++c) {
      if (counts[p][c] == 0) {
        result.warnings.push_back(std::string("stratification: ") + names[p] + " split has no samples of class " +
                                  std::to_string(c));
      }
    }
  }
  return result;
}

void split(Dataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  SplitResult r = stratified_split(ds.labels, ratios, seed);
  ds.split = std::move(r.indices);
  ds.warnings.insert(ds.warnings.end(), r.warnings.begin(), r.warnings.end());
}

}  // namespace advclaim
