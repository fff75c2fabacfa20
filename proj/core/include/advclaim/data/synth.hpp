#pragma once

#include <cstddef>
#include <cstdint>

#include "advclaim/data/dataset.hpp"
#include "advclaim/data/split.hpp"

namespace advclaim {

// Two Gaussian clusters with per-coordinate std `noise_std` around 0.5,
// their centers `class_separation * 2 * noise_std` apart along a random unit
// direction. The Bayes accuracy is therefore Phi(class_separation).
struct SynthConfig {
  std::size_t n_samples = 1000;
  std::size_t n_features = 12;
  double class_separation = 2.0;
  double fraud_fraction = 0.25;
  std::uint64_t seed = 7;
  double noise_std = 0.1;
};

void validate(const SynthConfig& cfg);

Dataset synth_generate(const SynthConfig& cfg, const SplitRatios& ratios = {});

}  // namespace advclaim
