#pragma once

#include <functional>
#include <span>
#include <vector>

#include "advclaim/numkit/matrix.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

enum class ActivationKind { sigmoid, tanh, leaky_relu, identity };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double slope = 0.01;  // leaky_relu only

  static Activation sigmoid() { return {ActivationKind::sigmoid, 0.0}; }
  static Activation tanh() { return {ActivationKind::tanh, 0.0}; }
  static Activation leaky_relu(double slope = 0.01) { return {ActivationKind::leaky_relu, slope}; }
  static Activation identity() { return {ActivationKind::identity, 0.0}; }
};

double sigmoid(double x) noexcept;
double apply_activation(const Activation& act, double x) noexcept;
// Derivative expressed through the pre-activation `x` and output `y`.
double activation_slope(const Activation& act, double x, double y) noexcept;

// Elementwise map. Rejects non-finite input and a leaky slope outside (0, 1).
Matrix activation(const Activation& act, ConstMatrixView x);
void activation_inplace(const Activation& act, MatrixView x);

// Probabilities are clamped to [kBceClamp, 1 - kBceClamp] before the log.
inline constexpr double kBceClamp = 1e-7;

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dp, same length as p
};

// L = -mean(y log p + (1 - y) log(1 - p))
BceResult bce_loss(std::span<const double> p, std::span<const double> y);

// Mean BCE computed from logits with a log-sum-exp form; exact for any logit.
double bce_from_logit(double logit, double y) noexcept;

// Central differences, one coordinate at a time.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h);

Matrix sample_normal(Rng& rng, std::size_t rows, std::size_t cols, double mean = 0.0, double stddev = 1.0);

// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double relative_error(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace advclaim
