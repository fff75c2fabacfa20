#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/errors.hpp"
#include "advclaim/ganrl/gan.hpp"
#include "advclaim/ganrl/surrogate.hpp"

namespace advclaim {

// How the generator loss gradient is estimated when the surrogate only
// returns scores. output: perturb generated records and backprop the
// estimate through G. parameter: perturb G's parameter vector directly.
enum class EsSpace { output, parameter };

const char* to_string(EsSpace s) noexcept;
EsSpace es_space_from_string(const std::string& s);

struct RlConfig {
  std::size_t batch = 32;    // B
  std::size_t horizon = 16;  // T, steps per episode
  std::size_t latent = 64;   // F, must equal the generator's latent width
  double alpha = 0.5;
  double gamma = 0.9;
  std::size_t episodes = 150;
  int y_target = 0;
  double generator_lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t es_samples = 16;  // m, antithetic pairs
  double es_sigma = 0.05;
  EsSpace es_space = EsSpace::parameter;
  // Start each episode from latents whose outputs lie closest to randomly
  // drawn real records instead of plain N(0, I).
  bool anchor = false;
  std::size_t anchor_candidates = 32;
};

void validate(const RlConfig& cfg);

struct StepRecord {
  std::size_t t = 0;
  double reward = 0.0;
  double td_error = 0.0;
  double mean_score = 0.0;
  std::size_t queries = 0;  // handle counter after this step's scoring
};

struct EpisodeTrace {
  std::size_t episode = 0;
  std::vector<StepRecord> steps;
  double generator_loss = 0.0;  // BCE(S(G(z_T)), y_target) before the update

  double mean_reward() const;
};

// Refinement stopped because the surrogate's query budget ran out. Carries
// every fully or partly completed episode.
class BudgetError : public Error {
 public:
  BudgetError(const std::string& what, std::vector<EpisodeTrace> partial)
      : Error(what), partial_(std::move(partial)) {}
  const std::vector<EpisodeTrace>& partial_traces() const noexcept { return partial_; }

 private:
  std::vector<EpisodeTrace> partial_;
};

// Fraction of predictions equal to y_target. Empty input -> ConfigError.
double step_reward(std::span<const int> predicted, int y_target);

// r_t minus the mean of r_0..r_t.
double td_error(std::span<const double> rewards);

// z + alpha * delta * gamma^t * n with n ~ N(0, I) drawn from rng (always
// drawn, so the stream position does not depend on delta). The drawn n is
// copied to noise_out when given.
Matrix td_update(const Matrix& z, double delta, double alpha, double gamma, std::size_t t, Rng& rng,
                 Matrix* noise_out = nullptr);

struct RlOptions {
  const Matrix* anchors = nullptr;  // real records, required when cfg.anchor
  // When set, receives z_0..z_T of every episode.
  std::vector<std::vector<Matrix>>* latent_log = nullptr;
};

// Traces, one per episode. The surrogate is the only channel to the target.
std::vector<EpisodeTrace> rl_refine(GeneratorNet& gen, const SurrogateHandle& surrogate, const RlConfig& cfg,
                                    const RlOptions& options = {});

// {episode, t, reward, td_error, mean_score, queries} per line.
std::string traces_jsonl(std::span<const EpisodeTrace> traces);

// Predicted labels for n_batches fresh batches of G(z), z ~ N(0, I). The
// generated records themselves are appended to batches_out when given.
std::vector<std::vector<int>> label_generated_batches(const GeneratorNet& gen, const SurrogateHandle& surrogate,
                                                      std::size_t n_batches, std::size_t batch_size,
                                                      std::uint64_t seed, std::vector<Matrix>* batches_out = nullptr);

// Rows decoded back to the raw schema, header = feature names.
std::string generated_batch_csv(const Matrix& batch, const std::vector<FeatureMeta>& meta);

}  // namespace advclaim
