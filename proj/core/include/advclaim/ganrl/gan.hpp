#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "advclaim/errors.hpp"
#include "advclaim/ganrl/mlp.hpp"
#include "advclaim/numkit/adam.hpp"

namespace advclaim {

inline constexpr std::size_t kDefaultLatentWidth = 64;

// latent -> 128 -> 256 -> 512 -> 64 -> out_dim, leaky ReLU(0.01) hidden,
// sigmoid output so samples land in [0, 1]^out_dim.
struct GeneratorNet {
  Mlp net;
  AdamState adam;

  std::size_t latent_dim() const noexcept { return net.input_width(); }
  std::size_t out_dim() const noexcept { return net.output_width(); }

  Matrix forward(ConstMatrixView z) const { return net.forward(z); }

  nlohmann::json to_json() const;
  static GeneratorNet from_json(const nlohmann::json& j);
};

// in_dim -> 64 -> 512 -> 256 -> 128 -> 1. The net itself ends in an identity
// unit holding the logit; probability() applies the sigmoid.
struct DiscriminatorNet {
  Mlp net;
  AdamState adam;

  std::size_t in_dim() const noexcept { return net.input_width(); }
  std::vector<double> logits(ConstMatrixView x) const;
  std::vector<double> probability(ConstMatrixView x) const;
};

GeneratorNet make_generator(std::size_t latent_dim, std::size_t out_dim, std::uint64_t seed, double lr = 1e-3);
DiscriminatorNet make_discriminator(std::size_t in_dim, std::uint64_t seed, double lr = 1e-3);

// n rows of G(z) with z ~ N(0, I) drawn from rng.
Matrix generate_batch(const GeneratorNet& gen, Rng& rng, std::size_t n);

struct GanConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double gen_lr = 2e-4;
  double disc_lr = 2e-4;
  double beta1 = 0.5;
  // Generator minimizes -log D(G(z)) instead of log(1 - D(G(z))).
  bool non_saturating = false;
  std::uint64_t seed = 0;
  double divergence_threshold = 1e-6;
  std::size_t divergence_patience = 100;
};

struct GanHistory {
  std::vector<double> disc_loss;  // -[mean log D(x) + mean log(1 - D(G(z)))] per step
  std::vector<double> gen_loss;   // the generator objective actually minimized, per step
};

class DivergenceError : public TrainingError {
 public:
  DivergenceError(const std::string& what, GanHistory history)
      : TrainingError(what), history_(std::move(history)) {}
  const GanHistory& history() const noexcept { return history_; }

 private:
  GanHistory history_;
};

// Alternating minibatch updates over all rows of `data` (values in [0, 1]).
// Throws DivergenceError once the discriminator loss stays below the threshold
// for `divergence_patience` consecutive steps.
GanHistory pretrain_gan(GeneratorNet& gen, DiscriminatorNet& disc, const Matrix& data, const GanConfig& cfg);

}  // namespace advclaim
