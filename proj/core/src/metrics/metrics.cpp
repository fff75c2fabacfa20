#include "advclaim/metrics/metrics.hpp"

#include <numeric>

#include "advclaim/errors.hpp"

namespace advclaim {

Fraction Fraction::make(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw UndefinedMetric("zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

Fraction operator+(const Fraction& a, const Fraction& b) {
  const std::uint64_t l = std::lcm(a.den, b.den);
  return Fraction::make(a.num * (l / a.den) + b.num * (l / b.den), l);
}

ConfusionCounts confusion(std::span<const int> labels, std::span<const int> preds) {
  if (labels.size() != preds.size()) {
    throw ShapeError("confusion: " + std::to_string(labels.size()) + " labels vs " + std::to_string(preds.size()) +
                     " predictions");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    const int p = preds[i];
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) throw EvaluationError("confusion: non-binary value");
    if (y == 1) {
      (p == 1 ? c.tp : c.fn) += 1;
    } else {
      (p == 1 ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

Fraction accuracy_exact(const ConfusionCounts& c) {
  if (c.total() == 0) throw UndefinedMetric("accuracy of an empty evaluation");
  return Fraction::make(c.tp + c.tn, c.total());
}

Fraction error_rate_exact(const ConfusionCounts& c) {
  if (c.total() == 0) throw UndefinedMetric("error rate of an empty evaluation");
  return Fraction::make(c.fp + c.fn, c.total());
}

Fraction f1_exact(const ConfusionCounts& c) {
  const std::uint64_t den = 2 * c.tp + c.fp + c.fn;
  if (den == 0) throw UndefinedMetric("F1 undefined: no positive labels or predictions");
  return Fraction::make(2 * c.tp, den);
}

double accuracy(const ConfusionCounts& c) { return accuracy_exact(c).value(); }
double error_rate(const ConfusionCounts& c) { return error_rate_exact(c).value(); }
double f1(const ConfusionCounts& c) { return f1_exact(c).value(); }

const char* to_string(AsrMode mode) noexcept { return mode == AsrMode::sample_rate ? "sample_rate" : "batch_all"; }

AsrMode asr_mode_from_string(const std::string& s) {
  if (s == "sample_rate") return AsrMode::sample_rate;
  if (s == "batch_all") return AsrMode::batch_all;
  throw ConfigError("unknown ASR mode '" + s + "' (expected sample_rate or batch_all)");
}

Fraction asr_exact(const std::vector<std::vector<int>>& batches, int y_target, AsrMode mode) {
  std::uint64_t hit = 0, total = 0, full = 0, sent = 0;
  for (const auto& b : batches) {
    if (b.empty()) continue;
    std::uint64_t h = 0;
    for (int p : b) h += p == y_target ? 1 : 0;
    hit += h;
    total += b.size();
    full += h == b.size() ? 1 : 0;
    ++sent;
  }
  if (sent == 0) throw UndefinedMetric("ASR over no batches");
  return mode == AsrMode::sample_rate ? Fraction::make(hit, total) : Fraction::make(full, sent);
}

double asr(const std::vector<std::vector<int>>& batches, int y_target, AsrMode mode) {
  return asr_exact(batches, y_target, mode).value();
}

}  // namespace advclaim
