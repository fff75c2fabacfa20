#include "advclaim/ganrl/rl.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advclaim/data/csv.hpp"
#include "advclaim/data/encoding.hpp"
#include "advclaim/numkit/ops.hpp"

namespace advclaim {

const char* to_string(EsSpace s) noexcept { return s == EsSpace::output ? "output" : "parameter"; }

EsSpace es_space_from_string(const std::string& s) {
  if (s == "output") return EsSpace::output;
  if (s == "parameter") return EsSpace::parameter;
  throw ConfigError("unknown estimator space '" + s + "' (expected output or parameter)");
}

void validate(const RlConfig& cfg) {
  if (cfg.batch == 0 || cfg.horizon == 0 || cfg.latent == 0) throw ConfigError("rl: B, T and F must all be >= 1");
  if (!(cfg.alpha > 0.0)) throw ConfigError("rl: alpha must be > 0");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("rl: gamma must lie in (0, 1]");
  if (cfg.y_target != 0 && cfg.y_target != 1) throw ConfigError("rl: y_target must be 0 or 1");
  if (!(cfg.generator_lr > 0.0)) throw ConfigError("rl: generator_lr must be > 0");
  if (cfg.es_samples == 0) throw ConfigError("rl: es_samples must be >= 1");
  if (!(cfg.es_sigma > 0.0)) throw ConfigError("rl: es_sigma must be > 0");
  if (cfg.anchor && cfg.anchor_candidates == 0) throw ConfigError("rl: anchor_candidates must be >= 1");
}

double EpisodeTrace::mean_reward() const {
  if (steps.empty()) return 0.0;
  double s = 0.0;
  for (const auto& st : steps) s += st.reward;
  return s / static_cast<double>(steps.size());
}

double step_reward(std::span<const int> predicted, int y_target) {
  if (predicted.empty()) throw ConfigError("step_reward: empty batch");
  std::size_t hit = 0;
  for (int p : predicted) hit += p == y_target ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(predicted.size());
}

double td_error(std::span<const double> rewards) {
  if (rewards.empty()) throw ConfigError("td_error: no rewards");
  double s = 0.0;
  for (double r : rewards) s += r;
  return rewards.back() - s / static_cast<double>(rewards.size());
}

Matrix td_update(const Matrix& z, double delta, double alpha, double gamma, std::size_t t, Rng& rng,
                 Matrix* noise_out) {
  const double scale = alpha * delta * std::pow(gamma, static_cast<double>(t));
  Matrix noise = sample_normal(rng, z.rows(), z.cols());
  Matrix out = z;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += scale * noise.values()[i];
  if (noise_out) *noise_out = std::move(noise);
  return out;
}

namespace {

double mean_bce(std::span<const double> scores, int y_target) {
  const std::vector<double> y(scores.size(), static_cast<double>(y_target));
  return bce_loss(scores, y).loss;
}

double clamped_bce(double p, double y) {
  const double q = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

Matrix initial_latents(const GeneratorNet& gen, const RlConfig& cfg, const RlOptions& options, Rng& rng) {
  if (!cfg.anchor) return sample_normal(rng, cfg.batch, cfg.latent);
  const Matrix& anchors = *options.anchors;
  Matrix z(cfg.batch, cfg.latent);
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const auto target = anchors.row(static_cast<std::size_t>(rng.uniform_index(anchors.rows())));
    const Matrix cand = sample_normal(rng, cfg.anchor_candidates, cfg.latent);
    const Matrix out = gen.forward(cand);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cand.rows(); ++k) {
      double d = 0.0;
      for (std::size_t j = 0; j < out.cols(); ++j) d += (out(k, j) - target[j]) * (out(k, j) - target[j]);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    std::copy(cand.row(best).begin(), cand.row(best).end(), z.row(b).begin());
  }
  return z;
}

// Gradient of mean_i BCE(S(x_i), y) w.r.t. x from antithetic score queries.
// Row losses are independent, so one perturbation of the batch serves all rows.
Matrix output_space_estimate(const SurrogateHandle& s, const Matrix& x, const RlConfig& cfg, Rng& rng) {
  const double y = static_cast<double>(cfg.y_target);
  const double n = static_cast<double>(x.rows());
  Matrix grad(x.rows(), x.cols());
  for (std::size_t k = 0; k < cfg.es_samples; ++k) {
    const Matrix eps = sample_normal(rng, x.rows(), x.cols());
    Matrix plus = x, minus = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
      plus.values()[i] += cfg.es_sigma * eps.values()[i];
      minus.values()[i] -= cfg.es_sigma * eps.values()[i];
    }
    const auto sp = s.score(plus);
    const auto sm = s.score(minus);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double w = (clamped_bce(sp[r], y) - clamped_bce(sm[r], y)) /
                       (2.0 * cfg.es_sigma * static_cast<double>(cfg.es_samples) * n);
      if (w == 0.0) continue;
      for (std::size_t c = 0; c < x.cols(); ++c) grad(r, c) += w * eps(r, c);
    }
  }
  return grad;
}

std::vector<double> parameter_space_estimate(GeneratorNet& gen, const SurrogateHandle& s, const Matrix& z,
                                             const RlConfig& cfg, Rng& rng) {
  std::vector<double>& theta = gen.net.params();
  const std::vector<double> base = theta;
  std::vector<double> grad(theta.size(), 0.0);
  std::vector<double> eps(theta.size());
  for (std::size_t k = 0; k < cfg.es_samples; ++k) {
    for (double& e : eps) e = rng.normal();
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = base[i] + cfg.es_sigma * eps[i];
    const double lp = mean_bce(s.score(gen.forward(z)), cfg.y_target);
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = base[i] - cfg.es_sigma * eps[i];
    const double lm = mean_bce(s.score(gen.forward(z)), cfg.y_target);
    theta = base;
    const double w = (lp - lm) / (2.0 * cfg.es_sigma * static_cast<double>(cfg.es_samples));
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += w * eps[i];
  }
  return grad;
}

}  // namespace

std::vector<EpisodeTrace> rl_refine(GeneratorNet& gen, const SurrogateHandle& surrogate, const RlConfig& cfg,
                                    const RlOptions& options) {
  validate(cfg);
  if (cfg.latent != gen.latent_dim()) {
    throw ConfigError("rl: latent width " + std::to_string(cfg.latent) + " does not match the generator's " +
                      std::to_string(gen.latent_dim()));
  }
  if (surrogate.n_features() != gen.out_dim()) throw ShapeError("rl: surrogate width does not match generator output");
  if (cfg.anchor && (options.anchors == nullptr || options.anchors->rows() == 0 ||
                     options.anchors->cols() != gen.out_dim())) {
    throw ConfigError("rl: anchor mode needs real records of the generator's width");
  }
  gen.adam.learning_rate = cfg.generator_lr;
  if (gen.adam.first_moment.size() != gen.net.params().size()) {
    gen.adam = AdamState(gen.net.params().size(), cfg.generator_lr);
  }

  std::vector<EpisodeTrace> traces;
  const std::vector<int> targets(cfg.batch, cfg.y_target);
  try {
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
      Rng ep_rng = Rng::derive(cfg.seed, 1000 + ep);
      Rng es_rng = Rng::derive(cfg.seed, 1'000'000 + ep);
      EpisodeTrace trace;
      trace.episode = ep;
      traces.push_back(trace);
      EpisodeTrace& tr = traces.back();

      Matrix z = initial_latents(gen, cfg, options, ep_rng);
      std::vector<Matrix>* zlog = nullptr;
      if (options.latent_log) {
        options.latent_log->emplace_back();
        zlog = &options.latent_log->back();
        zlog->push_back(z);
      }
      std::vector<double> rewards;
      for (std::size_t t = 0; t < cfg.horizon; ++t) {
        const Matrix x = gen.forward(z);
        const auto scores = surrogate.score(x);
        const auto pred = threshold_labels(scores);
        rewards.push_back(step_reward(pred, cfg.y_target));
        const double delta = td_error(rewards);
        double mean_score = 0.0;
        for (double s : scores) mean_score += s / static_cast<double>(scores.size());
        tr.steps.push_back({t, rewards.back(), delta, mean_score, surrogate.queries()});
        z = td_update(z, delta, cfg.alpha, cfg.gamma, t, ep_rng);
        if (zlog) zlog->push_back(z);
      }

      Mlp::Tape tape;
      const Matrix x = gen.net.forward(z, tape);
      tr.generator_loss = mean_bce(surrogate.score(x), cfg.y_target);
      std::vector<double> grad;
      if (surrogate.differentiable()) {
        const Matrix gx = surrogate.loss_gradient(x, targets);
        gen.net.backward(tape, gx, grad);
      } else if (cfg.es_space == EsSpace::output) {
        const Matrix gx = output_space_estimate(surrogate, x, cfg, es_rng);
        gen.net.backward(tape, gx, grad);
      } else {
        grad = parameter_space_estimate(gen, surrogate, z, cfg, es_rng);
      }
      adam_step(gen.net.params(), grad, gen.adam);
    }
  } catch (const QueryBudgetExceeded& e) {
    throw BudgetError(e.what(), std::move(traces));
  }
  return traces;
}

std::string traces_jsonl(std::span<const EpisodeTrace> traces) {
  std::string out;
  for (const auto& tr : traces) {
    for (const auto& st : tr.steps) {
      nlohmann::json j = {{"episode", tr.episode},   {"t", st.t},
                          {"reward", st.reward},     {"td_error", st.td_error},
                          {"mean_score", st.mean_score}, {"queries", st.queries}};
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

std::vector<std::vector<int>> label_generated_batches(const GeneratorNet& gen, const SurrogateHandle& surrogate,
                                                      std::size_t n_batches, std::size_t batch_size,
                                                      std::uint64_t seed, std::vector<Matrix>* batches_out) {
  std::vector<std::vector<int>> out;
  Rng rng = Rng::derive(seed, 77);
  for (std::size_t b = 0; b < n_batches; ++b) {
    const Matrix x = generate_batch(gen, rng, batch_size);
    out.push_back(threshold_labels(surrogate.score(x)));
    if (batches_out) batches_out->push_back(x);
  }
  return out;
}

std::string generated_batch_csv(const Matrix& batch, const std::vector<FeatureMeta>& meta) {
  if (batch.cols() != meta.size()) throw ShapeError("generated batch width does not match the feature metadata");
  std::ostringstream os;
  std::vector<std::string> header;
  for (const auto& m : meta) header.push_back(m.name);
  write_csv_row(os, header);
  for (std::size_t r = 0; r < batch.rows(); ++r) write_csv_row(os, decode_row(meta, batch.row(r)));
  return os.str();
}

}  // namespace advclaim
