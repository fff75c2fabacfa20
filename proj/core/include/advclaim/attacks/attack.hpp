#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "advclaim/models/classifier.hpp"
#include "advclaim/numkit/matrix.hpp"

namespace advclaim {

enum class AttackKind { fgsm, bim, pgd, noise };

const char* to_string(AttackKind kind) noexcept;
AttackKind attack_kind_from_string(const std::string& s);

// per_sample: a candidate replaces a sample once it fools the model on that
// sample. batch: a whole perturbed batch is accepted when batch accuracy drops
// below the best so far.
enum class NoiseAcceptance { per_sample, batch };

const char* to_string(NoiseAcceptance mode) noexcept;
NoiseAcceptance noise_acceptance_from_string(const std::string& s);

struct AttackConfig {
  double epsilon = 0.1;  // inf-norm budget in normalized units
  std::size_t steps = 10;
  double step_size = 0.0;  // 0 means epsilon / 4
  bool random_start = false;
  std::size_t max_iters = 100;
  double clamp_lo = 0.0;
  double clamp_hi = 1.0;
  std::uint64_t seed = 0;
  NoiseAcceptance noise_mode = NoiseAcceptance::per_sample;

  double resolved_step_size() const noexcept { return step_size > 0.0 ? step_size : epsilon / 4.0; }
};

// ConfigError on epsilon outside [0, 1], steps == 0, negative step size or an
// empty clamp range.
void validate(const AttackConfig& cfg);

struct AttackOutcome {
  Matrix adversarial;
  std::vector<bool> per_sample_flipped;  // prediction differs from the clean prediction
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  double epsilon = 0.0;
  std::string attack_name;
  // Noise attack only: number of fooled samples after each iteration.
  std::vector<std::size_t> flip_history;

  double flip_rate() const;
};

AttackOutcome fgsm(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg);
AttackOutcome bim(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg);
AttackOutcome pgd(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg);
AttackOutcome random_noise_attack(const Classifier& model, ConstMatrixView x, std::span<const int> y,
                                  const AttackConfig& cfg);

AttackOutcome run_attack(AttackKind kind, const Classifier& model, ConstMatrixView x, std::span<const int> y,
                         const AttackConfig& cfg);

struct SweepPoint {
  double epsilon = 0.0;
  std::optional<AttackOutcome> outcome;
  std::string error;  // set when this epsilon failed
};

// 0.05, 0.10, ..., 0.50
std::vector<double> default_epsilon_grid();

// One attack per grid value with the shared cfg (epsilon overridden). Errors
// for a single epsilon are recorded in the point and the sweep continues.
std::vector<SweepPoint> sweep(const Classifier& model, AttackKind kind, std::span<const double> grid,
                              ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg);

// Header `attack,epsilon,accuracy,flip_rate,seed`; failed points are skipped.
std::string sweep_csv(std::span<const SweepPoint> points, AttackKind kind, std::uint64_t seed);

}  // namespace advclaim
