#include "advclaim/data/dataset.hpp"

#include <algorithm>

#include "advclaim/errors.hpp"

namespace advclaim {

const char* to_string(FeatureKind kind) noexcept {
  return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "numeric") return FeatureKind::numeric;
  if (s == "categorical") return FeatureKind::categorical;
  throw SchemaError("unknown feature kind '" + s + "'");
}

const std::vector<std::size_t>& Dataset::indices(SplitPart part) const {
  switch (part) {
    case SplitPart::train:
      return split.train;
    case SplitPart::val:
      return split.val;
    case SplitPart::test:
      break;
  }
  return split.test;
}

Matrix Dataset::part_features(SplitPart part) const { return features.select_rows(indices(part)); }

std::vector<int> Dataset::part_labels(SplitPart part) const {
  const auto& idx = indices(part);
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(labels.at(i));
  return out;
}

std::vector<std::string> Dataset::feature_names() const {
  std::vector<std::string> names;
  names.reserve(meta.size());
  for (const auto& m : meta) names.push_back(m.name);
  return names;
}

void validate(const Dataset& ds) {
  const std::size_t n = ds.n_samples();
  if (ds.labels.size() != n) throw SchemaError("label count does not match feature rows");
  if (ds.meta.size() != ds.n_features()) throw SchemaError("feature metadata width does not match features");
  for (int y : ds.labels)
    if (y != 0 && y != 1) throw SchemaError("labels must be 0 or 1");
  for (double v : ds.features.values())
    if (!(v >= 0.0 && v <= 1.0)) throw SchemaError("normalized features must lie in [0, 1]");
  std::vector<char> seen(n, 0);
  for (const auto* part : {&ds.split.train, &ds.split.val, &ds.split.test}) {
    for (std::size_t i : *part) {
      if (i >= n) throw SchemaError("split index out of range");
      if (seen[i]) throw SchemaError("split sets overlap at row " + std::to_string(i));
      seen[i] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw SchemaError("split sets do not cover all rows");
}

}  // namespace advclaim
