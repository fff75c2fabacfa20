#include "advclaim/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

void validate(const SynthConfig& cfg) {
  if (cfg.n_samples < 10) throw ConfigError("synth: n_samples must be >= 10");
  if (cfg.n_features < 2) throw ConfigError("synth: n_features must be >= 2");
  if (!(cfg.class_separation >= 0.0)) throw ConfigError("synth: class_separation must be >= 0");
  if (!(cfg.fraud_fraction > 0.0 && cfg.fraud_fraction < 1.0)) {
    throw ConfigError("synth: fraud_fraction must lie in (0, 1)");
  }
  if (!(cfg.noise_std > 0.0)) throw ConfigError("synth: noise_std must be > 0");
}

Dataset synth_generate(const SynthConfig& cfg, const SplitRatios& ratios) {
  validate(cfg);
  const std::size_t n = cfg.n_samples;
  const std::size_t f = cfg.n_features;

  Rng label_rng = Rng::derive(cfg.seed, 1);
  Rng direction_rng = Rng::derive(cfg.seed, 2);
  Rng noise_rng = Rng::derive(cfg.seed, 3);

  auto n_fraud = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.fraud_fraction));
  n_fraud = std::clamp<std::size_t>(n_fraud, 1, n - 1);
  std::vector<int> labels(n, 0);
  std::fill_n(labels.begin(), n_fraud, 1);
  label_rng.shuffle(std::span<int>(labels));

  std::vector<double> u(f);
  double norm = 0.0;
  while (norm == 0.0) {
    norm = 0.0;
    for (double& v : u) {
      v = direction_rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
  }
  for (double& v : u) v /= norm;

  const double half_gap = cfg.class_separation * cfg.noise_std;
  Dataset ds;
  ds.features = Matrix(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    const double sign = labels[i] == 1 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double center = 0.5 + sign * half_gap * u[j];
      ds.features(i, j) = std::clamp(center + cfg.noise_std * noise_rng.normal(), 0.0, 1.0);
    }
  }
  ds.labels = std::move(labels);
  for (std::size_t j = 0; j < f; ++j) {
    char name[32];
    std::snprintf(name, sizeof(name), "f%02zu", j);
    FeatureMeta fm;
    fm.name = name;
    fm.kind = FeatureKind::numeric;
    fm.min = 0.0;
    fm.max = 1.0;
    fm.median = 0.5;
    ds.meta.push_back(fm);
  }
  ds.seed = cfg.seed;
  char src[160];
  std::snprintf(src, sizeof(src), "synth:n=%zu,f=%zu,separation=%.17g,fraud_fraction=%.17g,noise_std=%.17g", n, f,
                cfg.class_separation, cfg.fraud_fraction, cfg.noise_std);
  ds.source = src;
  split(ds, ratios, cfg.seed);
  return ds;
}

}  // namespace advclaim
