#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace advclaim {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_stabilizer = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n_params, double lr = 1e-3)
      : first_moment(n_params, 0.0), second_moment(n_params, 0.0), learning_rate(lr) {}
};

// One bias-corrected Adam update, in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace advclaim
