#include "advclaim/attribution/shapley.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/parallel.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

ScoreFn score_fn(const Classifier& model) {
  return [&model](ConstMatrixView x) { return model.predict_proba(x); };
}

double AttributionResult::sum() const {
  double s = 0.0;
  for (const auto& p : per_feature) s += p.value;
  return s;
}

namespace {

constexpr std::size_t kChunk = 32;

struct ChunkSums {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  double total = 0.0;
  double total_sq = 0.0;
};

}  // namespace

AttributionResult mc_shapley(const ScoreFn& f, std::span<const double> x, const Matrix& background,
                             std::size_t n_permutations, std::uint64_t seed,
                             const std::vector<std::string>& feature_names) {
  const std::size_t nf = x.size();
  if (background.rows() == 0) throw ConfigError("shapley: background set is empty");
  if (n_permutations == 0) throw ConfigError("shapley: n_permutations must be >= 1");
  if (background.cols() != nf) {
    throw ShapeError("shapley: explained row has " + std::to_string(nf) + " features but the background has " +
                     std::to_string(background.cols()));
  }
  if (!feature_names.empty() && feature_names.size() != nf) throw ShapeError("shapley: feature name count mismatch");

  const std::size_t n_chunks = (n_permutations + kChunk - 1) / kChunk;
  std::vector<ChunkSums> chunks(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk;
    const std::size_t count = std::min(kChunk, n_permutations - first);
    Matrix rows(count * (nf + 1), nf);
    std::vector<std::vector<std::size_t>> perms(count);
    for (std::size_t k = 0; k < count; ++k) {
      Rng rng = Rng::derive(seed, first + k);
      auto& perm = perms[k];
      perm.resize(nf);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(perm));
      const auto bg = background.row(static_cast<std::size_t>(rng.uniform_index(background.rows())));
      const std::size_t base = k * (nf + 1);
      std::copy(bg.begin(), bg.end(), rows.row(base).begin());
      for (std::size_t s = 0; s < nf; ++s) {
        auto next = rows.row(base + s + 1);
        const auto prev = rows.row(base + s);
        std::copy(prev.begin(), prev.end(), next.begin());
        next[perm[s]] = x[perm[s]];
      }
    }
    const std::vector<double> scores = f(rows);
    if (scores.size() != rows.rows()) throw EvaluationError("shapley: score function returned the wrong count");
    ChunkSums& out = chunks[c];
    out.sum.assign(nf, 0.0);
    out.sum_sq.assign(nf, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t base = k * (nf + 1);
      for (std::size_t s = 0; s < nf; ++s) {
        const double d = scores[base + s + 1] - scores[base + s];
        out.sum[perms[k][s]] += d;
        out.sum_sq[perms[k][s]] += d * d;
      }
      const double t = scores[base + nf] - scores[base];
      out.total += t;
      out.total_sq += t * t;
    }
  });

  std::vector<double> sum(nf, 0.0), sum_sq(nf, 0.0);
  double total = 0.0, total_sq = 0.0;
  for (const auto& c : chunks) {
    for (std::size_t j = 0; j < nf; ++j) {
      sum[j] += c.sum[j];
      sum_sq[j] += c.sum_sq[j];
    }
    total += c.total;
    total_sq += c.total_sq;
  }

  const double n = static_cast<double>(n_permutations);
  const auto std_err = [n](double s, double sq) {
    if (n < 2.0) return 0.0;
    const double mean = s / n;
    const double var = std::max(0.0, (sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
  };

  AttributionResult r;
  r.n_permutations = n_permutations;
  r.seed = seed;
  for (std::size_t j = 0; j < nf; ++j) {
    FeatureAttribution fa;
    fa.name = feature_names.empty() ? "f" + std::to_string(j) : feature_names[j];
    fa.value = sum[j] / n;
    fa.std_error = std_err(sum[j], sum_sq[j]);
    r.per_feature.push_back(std::move(fa));
  }
  r.sum_std_error = std_err(total, total_sq);

  const std::vector<double> bg_scores = f(background);
  r.base_value = std::accumulate(bg_scores.begin(), bg_scores.end(), 0.0) / static_cast<double>(bg_scores.size());
  const Matrix xm = Matrix::row_vector(x);
  r.score = f(xm).at(0);
  return r;
}

std::vector<ImportanceEntry> global_importance(const ScoreFn& f, const Dataset& ds, std::size_t n_explained,
                                               std::size_t n_permutations, std::uint64_t seed,
                                               std::size_t background_size) {
  std::vector<std::size_t> test = ds.indices(SplitPart::test);
  std::vector<std::size_t> train = ds.indices(SplitPart::train);
  if (n_explained > test.size()) {
    throw ConfigError("explain: n_explained " + std::to_string(n_explained) + " exceeds the test split size " +
                      std::to_string(test.size()));
  }
  if (train.empty()) throw ConfigError("explain: empty training split");
  Rng bg_rng = Rng::derive(seed, 3);
  bg_rng.shuffle(std::span<std::size_t>(train));
  train.resize(std::min(background_size, train.size()));
  std::sort(train.begin(), train.end());
  const Matrix background = ds.features.select_rows(train);
  Rng pick_rng = Rng::derive(seed, 4);
  pick_rng.shuffle(std::span<std::size_t>(test));
  test.resize(n_explained);

  const std::size_t nf = ds.n_features();
  std::vector<double> acc(nf, 0.0);
  for (std::size_t r = 0; r < test.size(); ++r) {
    const auto res = mc_shapley(f, ds.features.row(test[r]), background, n_permutations, mix64(seed + 0x5a17 + r));
    for (std::size_t j = 0; j < nf; ++j) acc[j] += std::abs(res.per_feature[j].value);
  }
  std::vector<ImportanceEntry> out(nf);
  const auto names = ds.feature_names();
  for (std::size_t j = 0; j < nf; ++j) {
    out[j].feature = names[j];
    out[j].mean_abs_shapley = test.empty() ? 0.0 : acc[j] / static_cast<double>(test.size());
  }
  std::vector<std::size_t> order(nf);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return out[a].mean_abs_shapley > out[b].mean_abs_shapley; });
  std::vector<ImportanceEntry> ranked;
  for (std::size_t k = 0; k < nf; ++k) {
    ranked.push_back(out[order[k]]);
    ranked.back().rank = k + 1;
  }
  return ranked;
}

std::string importance_csv(std::span<const ImportanceEntry> entries, std::size_t top_k) {
  std::ostringstream os;
  os << "feature,mean_abs_shapley,rank\n";
  const std::size_t n = top_k == 0 ? entries.size() : std::min(top_k, entries.size());
  char buf[64];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), ",%.8f,", entries[i].mean_abs_shapley);
    os << entries[i].feature << buf << entries[i].rank << '\n';
  }
  return os.str();
}

}  // namespace advclaim
