#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advclaim/numkit/matrix.hpp"

namespace advclaim {

// Common detector contract: fraud probability, thresholded label and, for
// differentiable families only, the input gradient of the BCE loss.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string family() const = 0;
  virtual std::size_t n_features() const = 0;

  // Deterministic, in [0, 1], one entry per row. Width mismatch -> ShapeError.
  virtual std::vector<double> predict_proba(ConstMatrixView x) const = 0;

  std::vector<int> predict_label(ConstMatrixView x, double threshold = 0.5) const;

  virtual bool differentiable() const { return false; }

  // Gradient of mean_i BCE(p_i, y_i) with respect to every input entry.
  // Throws NotDifferentiable unless differentiable() is true.
  virtual Matrix input_gradient(ConstMatrixView x, std::span<const int> y) const;

  // Hyperparameters and learned parameters, tagged with "family".
  virtual nlohmann::json to_json() const = 0;

 protected:
  void check_width(ConstMatrixView x) const;
};

// 1[p > threshold]; a probability exactly at the threshold maps to 0.
std::vector<int> threshold_labels(std::span<const double> proba, double threshold = 0.5);

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j);

}  // namespace advclaim
