#include "advclaim/numkit/ops.hpp"

#include <algorithm>
#include <cmath>

#include "advclaim/errors.hpp"

namespace advclaim {

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_activation(const Activation& act, double x) noexcept {
  switch (act.kind) {
    case ActivationKind::sigmoid:
      return sigmoid(x);
    case ActivationKind::tanh:
      return std::tanh(x);
    case ActivationKind::leaky_relu:
      return x > 0.0 ? x : act.slope * x;
    case ActivationKind::identity:
      break;
  }
  return x;
}

double activation_slope(const Activation& act, double x, double y) noexcept {
  switch (act.kind) {
    case ActivationKind::sigmoid:
      return y * (1.0 - y);
    case ActivationKind::tanh:
      return 1.0 - y * y;
    case ActivationKind::leaky_relu:
      return x > 0.0 ? 1.0 : act.slope;
    case ActivationKind::identity:
      break;
  }
  return 1.0;
}

void activation_inplace(const Activation& act, MatrixView x) {
  if (act.kind == ActivationKind::leaky_relu && !(act.slope > 0.0 && act.slope < 1.0)) {
    throw ConfigError("leaky_relu slope must lie in (0, 1)");
  }
  require_finite({x.data, x.size()}, "activation input");
  for (std::size_t i = 0; i < x.size(); ++i) x.data[i] = apply_activation(act, x.data[i]);
}

Matrix activation(const Activation& act, ConstMatrixView x) {
  Matrix out = Matrix::from_view(x);
  activation_inplace(act, out.view());
  return out;
}

BceResult bce_loss(std::span<const double> p, std::span<const double> y) {
  if (p.size() != y.size()) {
    throw ShapeError("bce_loss length mismatch: p has " + std::to_string(p.size()) + ", y has " +
                     std::to_string(y.size()));
  }
  BceResult result;
  result.grad.resize(p.size());
  if (p.empty()) return result;
  const double n = static_cast<double>(p.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
    total += y[i] * std::log(pc) + (1.0 - y[i]) * std::log(1.0 - pc);
    result.grad[i] = (-y[i] / pc + (1.0 - y[i]) / (1.0 - pc)) / n;
  }
  result.loss = -total / n;
  return result;
}

double bce_from_logit(double logit, double y) noexcept {
  // -[y log s(z) + (1-y) log(1-s(z))] = max(z,0) - z*y + log(1 + exp(-|z|))
  return std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw EvaluationError("finite difference step must be positive");
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe.values()[i];
    probe.values()[i] = orig + h;
    const double up = f(probe);
    probe.values()[i] = orig - h;
    const double down = f(probe);
    probe.values()[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw EvaluationError("non-finite function value at coordinate " + std::to_string(i));
    }
    grad.values()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Matrix sample_normal(Rng& rng, std::size_t rows, std::size_t cols, double mean, double stddev) {
  Matrix out(rows, cols);
  for (double& v : out.values()) v = rng.normal(mean, stddev);
  return out;
}

double relative_error(std::span<const double> a, std::span<const double> b) noexcept {
  double diff = 0.0, na = 0.0, nb = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom == 0.0) return 0.0;
  return std::sqrt(diff) / denom;
}

}  // namespace advclaim
