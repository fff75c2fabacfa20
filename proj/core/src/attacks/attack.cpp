#include "advclaim/attacks/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

const char* to_string(AttackKind kind) noexcept {
  switch (kind) {
    case AttackKind::fgsm: return "fgsm";
    case AttackKind::bim: return "bim";
    case AttackKind::pgd: return "pgd";
    case AttackKind::noise: return "noise";
  }
  return "?";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "fgsm") return AttackKind::fgsm;
  if (s == "bim") return AttackKind::bim;
  if (s == "pgd") return AttackKind::pgd;
  if (s == "noise") return AttackKind::noise;
  throw ConfigError("unknown attack '" + s + "' (expected fgsm, bim, pgd or noise)");
}

const char* to_string(NoiseAcceptance mode) noexcept {
  return mode == NoiseAcceptance::per_sample ? "per_sample" : "batch";
}

NoiseAcceptance noise_acceptance_from_string(const std::string& s) {
  if (s == "per_sample") return NoiseAcceptance::per_sample;
  if (s == "batch") return NoiseAcceptance::batch;
  throw ConfigError("unknown noise acceptance mode '" + s + "'");
}

void validate(const AttackConfig& cfg) {
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0)) throw ConfigError("attack: epsilon must lie in [0, 1]");
  if (cfg.steps == 0) throw ConfigError("attack: steps must be >= 1");
  if (!(cfg.step_size >= 0.0)) throw ConfigError("attack: step_size must be > 0 (or 0 for epsilon/4)");
  if (!(cfg.clamp_lo < cfg.clamp_hi)) throw ConfigError("attack: empty clamp range");
}

double AttackOutcome::flip_rate() const {
  if (per_sample_flipped.empty()) return 0.0;
  const auto n = std::count(per_sample_flipped.begin(), per_sample_flipped.end(), true);
  return static_cast<double>(n) / static_cast<double>(per_sample_flipped.size());
}

namespace {

double accuracy_of(std::span<const int> pred, std::span<const int> y) {
  if (y.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += pred[i] == y[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

void check_inputs(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg) {
  validate(cfg);
  if (x.cols != model.n_features()) {
    throw ShapeError("attack: input is " + shape_string(x) + " but the model expects " +
                     std::to_string(model.n_features()) + " features");
  }
  if (y.size() != x.rows) throw ShapeError("attack: label count does not match rows");
}

AttackOutcome finish(const Classifier& model, ConstMatrixView x, std::span<const int> y, Matrix adv,
                     const AttackConfig& cfg, const char* name, const std::vector<int>& clean_pred) {
  AttackOutcome out;
  const std::vector<int> adv_pred = model.predict_label(adv);
  out.per_sample_flipped.resize(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out.per_sample_flipped[i] = adv_pred[i] != clean_pred[i];
  out.accuracy_before = accuracy_of(clean_pred, y);
  out.accuracy_after = accuracy_of(adv_pred, y);
  out.adversarial = std::move(adv);
  out.epsilon = cfg.epsilon;
  out.attack_name = name;
  return out;
}

double sign_of(double g) { return g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0); }

// One signed step from `adv`, projected to the epsilon ball around `clean`
// and clamped. FGSM is this step with adv = clean and step = epsilon.
void signed_step(ConstMatrixView clean, MatrixView adv, const Matrix& grad, double step, const AttackConfig& cfg) {
  for (std::size_t i = 0; i < adv.size(); ++i) {
    const double x0 = clean.data[i];
    double v = adv.data[i] + step * sign_of(grad.values()[i]);
    v = std::min(std::max(v, x0 - cfg.epsilon), x0 + cfg.epsilon);
    adv.data[i] = std::clamp(v, cfg.clamp_lo, cfg.clamp_hi);
  }
}

Matrix iterate(const Classifier& model, ConstMatrixView x, std::span<const int> y, Matrix adv, std::size_t steps,
               double step, const AttackConfig& cfg) {
  if (!model.differentiable()) throw NotDifferentiable(model.family());
  for (std::size_t s = 0; s < steps; ++s) {
    const Matrix g = model.input_gradient(adv, y);
    signed_step(x, adv.view(), g, step, cfg);
  }
  return adv;
}

}  // namespace

AttackOutcome fgsm(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg) {
  check_inputs(model, x, y, cfg);
  const auto clean_pred = model.predict_label(x);
  Matrix adv = iterate(model, x, y, Matrix::from_view(x), 1, cfg.epsilon, cfg);
  return finish(model, x, y, std::move(adv), cfg, "fgsm", clean_pred);
}

AttackOutcome bim(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg) {
  check_inputs(model, x, y, cfg);
  const auto clean_pred = model.predict_label(x);
  Matrix adv = iterate(model, x, y, Matrix::from_view(x), cfg.steps, cfg.resolved_step_size(), cfg);
  return finish(model, x, y, std::move(adv), cfg, "bim", clean_pred);
}

AttackOutcome pgd(const Classifier& model, ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg) {
  check_inputs(model, x, y, cfg);
  if (!model.differentiable()) throw NotDifferentiable(model.family());
  const auto clean_pred = model.predict_label(x);
  Matrix start = Matrix::from_view(x);
  if (cfg.random_start) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      Rng rng = Rng::derive(cfg.seed, i);
      auto row = start.row(i);
      for (double& v : row) v = std::clamp(v + rng.uniform(-cfg.epsilon, cfg.epsilon), cfg.clamp_lo, cfg.clamp_hi);
    }
  }
  Matrix adv = iterate(model, x, y, std::move(start), cfg.steps, cfg.resolved_step_size(), cfg);
  return finish(model, x, y, std::move(adv), cfg, "pgd", clean_pred);
}

AttackOutcome random_noise_attack(const Classifier& model, ConstMatrixView x, std::span<const int> y,
                                  const AttackConfig& cfg) {
  check_inputs(model, x, y, cfg);
  const std::size_t n = x.rows;
  const std::size_t f = x.cols;
  const auto clean_pred = model.predict_label(x);
  Matrix adv = Matrix::from_view(x);

  std::vector<Rng> streams;
  streams.reserve(n);
  for (std::size_t i = 0; i < n; ++i) streams.push_back(Rng::derive(cfg.seed, i));

  // Candidate around the clean row, kept inside the epsilon ball and clamp range.
  const auto draw = [&](std::size_t i, std::span<double> out) {
    for (std::size_t j = 0; j < f; ++j) {
      const double x0 = x(i, j);
      double v = x0 + cfg.epsilon * streams[i].normal();
      v = std::min(std::max(v, x0 - cfg.epsilon), x0 + cfg.epsilon);
      out[j] = std::clamp(v, cfg.clamp_lo, cfg.clamp_hi);
    }
  };

  std::vector<std::size_t> history;
  if (cfg.noise_mode == NoiseAcceptance::per_sample) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) {
      if (clean_pred[i] == y[i]) active.push_back(i);
    }
    std::size_t fooled = 0;
    for (std::size_t it = 0; it < cfg.max_iters && !active.empty(); ++it) {
      Matrix cand(active.size(), f);
      for (std::size_t k = 0; k < active.size(); ++k) draw(active[k], cand.row(k));
      const auto pred = model.predict_label(cand);
      std::vector<std::size_t> still;
      for (std::size_t k = 0; k < active.size(); ++k) {
        const std::size_t i = active[k];
        if (pred[k] != y[i]) {
          std::copy(cand.row(k).begin(), cand.row(k).end(), adv.row(i).begin());
          ++fooled;
        } else {
          still.push_back(i);
        }
      }
      active = std::move(still);
      history.push_back(fooled);
    }
  } else {
    std::vector<int> best_pred = clean_pred;
    double best_acc = accuracy_of(clean_pred, y);
    const auto fooled_count = [&](const std::vector<int>& pred) {
      std::size_t c = 0;
      for (std::size_t i = 0; i < n; ++i) c += pred[i] != y[i] && clean_pred[i] == y[i] ? 1 : 0;
      return c;
    };
    Matrix cand(n, f);
    for (std::size_t it = 0; it < cfg.max_iters && best_acc > 0.0; ++it) {
      for (std::size_t i = 0; i < n; ++i) draw(i, cand.row(i));
      auto pred = model.predict_label(cand);
      const double acc = accuracy_of(pred, y);
      if (acc < best_acc && fooled_count(pred) >= fooled_count(best_pred)) {
        best_acc = acc;
        best_pred = std::move(pred);
        adv = cand;
      }
      history.push_back(fooled_count(best_pred));
    }
  }

  AttackOutcome out = finish(model, x, y, std::move(adv), cfg, "noise", clean_pred);
  out.flip_history = std::move(history);
  return out;
}

AttackOutcome run_attack(AttackKind kind, const Classifier& model, ConstMatrixView x, std::span<const int> y,
                         const AttackConfig& cfg) {
  switch (kind) {
    case AttackKind::fgsm: return fgsm(model, x, y, cfg);
    case AttackKind::bim: return bim(model, x, y, cfg);
    case AttackKind::pgd: return pgd(model, x, y, cfg);
    case AttackKind::noise: return random_noise_attack(model, x, y, cfg);
  }
  throw ConfigError("unknown attack kind");
}

std::vector<double> default_epsilon_grid() {
  std::vector<double> g;
  for (int k = 1; k <= 10; ++k) g.push_back(0.05 * k);
  return g;
}

std::vector<SweepPoint> sweep(const Classifier& model, AttackKind kind, std::span<const double> grid,
                              ConstMatrixView x, std::span<const int> y, const AttackConfig& cfg) {
  if (grid.empty()) throw ConfigError("sweep: epsilon grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("sweep: epsilon grid must be strictly ascending");
  }
  std::vector<SweepPoint> points;
  for (double eps : grid) {
    SweepPoint p;
    p.epsilon = eps;
    AttackConfig c = cfg;
    c.epsilon = eps;
    try {
      p.outcome = run_attack(kind, model, x, y, c);
    } catch (const Error& e) {
      p.error = e.what();
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::string sweep_csv(std::span<const SweepPoint> points, AttackKind kind, std::uint64_t seed) {
  std::ostringstream os;
  os << "attack,epsilon,accuracy,flip_rate,seed\n";
  char buf[128];
  for (const auto& p : points) {
    if (!p.outcome) continue;
    std::snprintf(buf, sizeof(buf), "%s,%.4f,%.6f,%.6f,", to_string(kind), p.epsilon, p.outcome->accuracy_after,
                  p.outcome->flip_rate());
    os << buf << seed << "\n";
  }
  return os.str();
}

}  // namespace advclaim
