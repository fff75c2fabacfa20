#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace advclaim {

// Non-negative rational kept in lowest terms; den > 0.
struct Fraction {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Fraction make(std::uint64_t num, std::uint64_t den);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Fraction&) const = default;
};

Fraction operator+(const Fraction& a, const Fraction& b);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Fraud (1) is the positive class. Length mismatch -> ShapeError, a value
// other than 0/1 -> EvaluationError.
ConfusionCounts confusion(std::span<const int> labels, std::span<const int> preds);

// All of these throw UndefinedMetric when the denominator is zero.
Fraction accuracy_exact(const ConfusionCounts& c);
Fraction error_rate_exact(const ConfusionCounts& c);
Fraction f1_exact(const ConfusionCounts& c);
double accuracy(const ConfusionCounts& c);
double error_rate(const ConfusionCounts& c);
double f1(const ConfusionCounts& c);

enum class AsrMode { sample_rate, batch_all };

const char* to_string(AsrMode mode) noexcept;
AsrMode asr_mode_from_string(const std::string& s);

// batches[b][i] is the detector's label for sample i of batch b.
// sample_rate: fraction of all samples labelled y_target.
// batch_all: fraction of batches where every sample is labelled y_target.
// No batches (or only empty ones) -> UndefinedMetric.
Fraction asr_exact(const std::vector<std::vector<int>>& batches, int y_target, AsrMode mode = AsrMode::sample_rate);
double asr(const std::vector<std::vector<int>>& batches, int y_target, AsrMode mode = AsrMode::sample_rate);

}  // namespace advclaim
