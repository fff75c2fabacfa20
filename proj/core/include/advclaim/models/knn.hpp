#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/models/classifier.hpp"

namespace advclaim {

// Stores the training split verbatim. Score = fraction of fraud labels among
// the k nearest rows by Euclidean distance; equal distances resolve to the
// lower training index.
class KnnModel final : public Classifier {
 public:
  KnnModel(Matrix train_x, std::vector<int> train_y, std::size_t k);

  std::string family() const override { return "knn"; }
  std::size_t n_features() const override { return train_x_.cols(); }
  std::vector<double> predict_proba(ConstMatrixView x) const override;
  nlohmann::json to_json() const override;
  static KnnModel from_json(const nlohmann::json& j);

  std::size_t k() const noexcept { return k_; }
  // Training-row indices of the k nearest neighbours of `query`, nearest first.
  std::vector<std::size_t> neighbours(std::span<const double> query) const;

 private:
  Matrix train_x_;
  std::vector<int> train_y_;
  std::size_t k_;
};

KnnModel train_knn(const Dataset& ds, std::size_t k);

}  // namespace advclaim
