#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/models/classifier.hpp"

namespace advclaim {

struct MarginParams {
  double c = 1.0;  // hinge weight relative to the L2 term
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

// Linear max-margin classifier held in primal form (w, b). The label is
// sign(w.x + b) mapped to {0, 1}; the score is sigmoid(w.x + b).
class MarginModel final : public Classifier {
 public:
  MarginModel(std::vector<double> w, double b, const MarginParams& params = {});

  std::string family() const override { return "margin"; }
  std::size_t n_features() const override { return w_.size(); }
  std::vector<double> predict_proba(ConstMatrixView x) const override;
  nlohmann::json to_json() const override;
  static MarginModel from_json(const nlohmann::json& j);

  double decision(std::span<const double> x) const;
  const std::vector<double>& weights() const noexcept { return w_; }
  double bias() const noexcept { return b_; }
  const MarginParams& params() const noexcept { return params_; }

 private:
  std::vector<double> w_;
  double b_;
  MarginParams params_;
};

// Stochastic subgradient descent on
//   (1 / (2 C n)) |w|^2 + (1/n) sum_i max(0, 1 - s_i (w.x_i + b)),  s_i = 2 y_i - 1
MarginModel fit_margin(ConstMatrixView x, std::span<const int> y, const MarginParams& params);
MarginModel train_margin(const Dataset& ds, const MarginParams& params);

}  // namespace advclaim
