#include "advclaim/models/margin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/ops.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim {

MarginModel::MarginModel(std::vector<double> w, double b, const MarginParams& params)
    : w_(std::move(w)), b_(b), params_(params) {
  require_finite(w_, "margin weights");
  if (!std::isfinite(b_)) throw EvaluationError("non-finite margin bias");
}

double MarginModel::decision(std::span<const double> x) const {
  double s = b_;
  for (std::size_t j = 0; j < w_.size(); ++j) s += w_[j] * x[j];
  return s;
}

std::vector<double> MarginModel::predict_proba(ConstMatrixView x) const {
  check_width(x);
  std::vector<double> p(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) p[r] = sigmoid(decision(x.row(r)));
  return p;
}

nlohmann::json MarginModel::to_json() const {
  return {{"family", family()},
          {"n_features", n_features()},
          {"hyperparameters",
           {{"c", params_.c},
            {"epochs", params_.epochs},
            {"learning_rate", params_.learning_rate},
            {"seed", params_.seed}}},
          {"w", w_},
          {"b", b_}};
}

MarginModel MarginModel::from_json(const nlohmann::json& j) {
  const auto& hp = j.at("hyperparameters");
  MarginParams p;
  p.c = hp.at("c").get<double>();
  p.epochs = hp.at("epochs").get<std::size_t>();
  p.learning_rate = hp.at("learning_rate").get<double>();
  p.seed = hp.at("seed").get<std::uint64_t>();
  auto w = j.at("w").get<std::vector<double>>();
  if (w.size() != j.at("n_features").get<std::size_t>()) throw SchemaError("margin: weight width mismatch");
  return MarginModel(std::move(w), j.at("b").get<double>(), p);
}

MarginModel fit_margin(ConstMatrixView x, std::span<const int> y, const MarginParams& params) {
  if (!(params.c > 0.0)) throw ConfigError("margin: C must be > 0");
  if (!(params.learning_rate > 0.0)) throw ConfigError("margin: learning_rate must be > 0");
  if (y.size() != x.rows || x.rows == 0) throw ShapeError("margin: label count does not match rows");
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(y.size())) {
    throw TrainingError("margin: training data must contain both classes");
  }

  const std::size_t n = x.rows;
  const double reg = 1.0 / (params.c * static_cast<double>(n));
  std::vector<double> w(x.cols, 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::derive(params.seed, 21);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    const double lr = params.learning_rate / std::sqrt(1.0 + static_cast<double>(epoch));
    for (std::size_t i : order) {
      const auto xi = x.row(i);
      const double s = y[i] == 1 ? 1.0 : -1.0;
      double f = b;
      for (std::size_t j = 0; j < w.size(); ++j) f += w[j] * xi[j];
      const bool active = s * f < 1.0;
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * (reg * w[j] - (active ? s * xi[j] : 0.0));
      if (active) b += lr * s;
    }
  }
  return MarginModel(std::move(w), b, params);
}

MarginModel train_margin(const Dataset& ds, const MarginParams& params) {
  const Matrix x = ds.part_features(SplitPart::train);
  const std::vector<int> y = ds.part_labels(SplitPart::train);
  return fit_margin(x, y, params);
}

}  // namespace advclaim
