#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "advclaim/numkit/matrix.hpp"
#include "advclaim/numkit/ops.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

// Fully connected stack over one flat parameter buffer. Layer l owns a
// widths[l] x widths[l+1] weight block followed by its bias.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<std::size_t> widths, Activation hidden, Activation output);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t n_layers() const noexcept { return widths_.size() - 1; }
  std::size_t input_width() const noexcept { return widths_.front(); }
  std::size_t output_width() const noexcept { return widths_.back(); }
  const Activation& hidden_activation() const noexcept { return hidden_; }
  const Activation& output_activation() const noexcept { return output_; }

  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  void initialize(Rng& rng);

  struct Tape {
    std::vector<Matrix> inputs;  // input of each layer
    std::vector<Matrix> pre;     // pre-activation of each layer
    Matrix output;
  };

  Matrix forward(ConstMatrixView x) const;
  Matrix forward(ConstMatrixView x, Tape& tape) const;

  // grad_out = dL/d(output). Adds dL/d(params) into param_grad (resized if
  // empty) and returns dL/d(input).
  Matrix backward(const Tape& tape, ConstMatrixView grad_out, std::vector<double>& param_grad) const;

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  ConstMatrixView weight(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;

  std::vector<std::size_t> widths_;
  std::vector<std::size_t> offsets_;  // start of each layer's weight block
  Activation hidden_;
  Activation output_;
  std::vector<double> params_;
};

nlohmann::json activation_to_json(const Activation& act);
Activation activation_from_json(const nlohmann::json& j);

}  // namespace advclaim
