#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/models/classifier.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

struct BiRecurrentParams {
  std::size_t hidden_size = 220;  // per direction; the head sees 2x this
  std::size_t timesteps = 1;      // a record is split into this many equal-width steps
  double dropout_rate = 0.5;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

// One-layer bidirectional LSTM over the record (T steps of width F/T), the
// two final hidden states concatenated into a sigmoid head. Gate order in
// the packed weights is [input, forget, candidate, output].
class BiRecurrentModel final : public Classifier {
 public:
  BiRecurrentModel(std::size_t n_features, const BiRecurrentParams& params);

  std::string family() const override { return "birecurrent"; }
  std::size_t n_features() const override { return n_features_; }
  std::vector<double> predict_proba(ConstMatrixView x) const override;
  bool differentiable() const override { return true; }
  Matrix input_gradient(ConstMatrixView x, std::span<const int> y) const override;
  nlohmann::json to_json() const override;
  static BiRecurrentModel from_json(const nlohmann::json& j);

  const BiRecurrentParams& params() const noexcept { return params_; }
  std::span<double> parameters() noexcept { return weights_; }
  std::span<const double> parameters() const noexcept { return weights_; }

  // Mean BCE over the batch and its gradient with respect to every
  // parameter. Dropout is applied only when `dropout_rng` is non-null.
  double loss_and_param_grad(ConstMatrixView x, std::span<const int> y, std::vector<double>& grad,
                             Rng* dropout_rng = nullptr) const;
  double loss(ConstMatrixView x, std::span<const int> y) const;

  void initialize(Rng& rng);

 private:
  struct Block {
    std::size_t offset = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
  };
  struct Direction {
    Block wx;  // step_width x 4H
    Block wh;  // H x 4H
    Block b;   // 1 x 4H
  };
  struct Cache;

  ConstMatrixView block(const Block& b) const { return {weights_.data() + b.offset, b.rows, b.cols}; }
  MatrixView grad_block(std::vector<double>& g, const Block& b) const { return {g.data() + b.offset, b.rows, b.cols}; }

  void forward(ConstMatrixView x, Cache& cache, Rng* dropout_rng) const;
  // Returns mean loss; fills param grad and (optionally) input grad.
  double backward(ConstMatrixView x, std::span<const int> y, const Cache& cache, std::vector<double>* param_grad,
                  Matrix* input_grad) const;

  std::size_t n_features_;
  std::size_t step_width_;
  BiRecurrentParams params_;
  Direction fwd_;
  Direction bwd_;
  Block head_w_;  // 2H x 1
  Block head_b_;  // 1 x 1
  std::vector<double> weights_;
};

// BCE + Adam with mini-batches drawn from the train split. A train split
// lacking either class is a TrainingError.
BiRecurrentModel train_birecurrent(const Dataset& ds, const BiRecurrentParams& params);

}  // namespace advclaim
