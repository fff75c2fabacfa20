#include "advclaim/models/birecurrent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/adam.hpp"
#include "advclaim/numkit/ops.hpp"

namespace advclaim {

struct BiRecurrentModel::Cache {
  std::vector<Matrix> steps;  // T inputs of n x step_width, natural order
  struct Dir {
    std::vector<std::size_t> order;
    std::vector<Matrix> gates;  // activated [i f g o], n x 4H
    std::vector<Matrix> c;
    std::vector<Matrix> h;
  };
  Dir fwd;
  Dir bwd;
  Matrix concat;               // n x 2H, after dropout
  std::vector<double> mask;    // empty when dropout is off
  std::vector<double> logits;
};

namespace {

void run_direction(ConstMatrixView wx, ConstMatrixView wh, std::span<const double> b,
                   const std::vector<Matrix>& steps, std::size_t hidden, std::size_t n,
                   const std::vector<std::size_t>& order, std::vector<Matrix>& gates,
                   std::vector<Matrix>& cells, std::vector<Matrix>& hiddens) {
  const std::size_t g4 = 4 * hidden;
  gates.clear();
  cells.clear();
  hiddens.clear();
  for (std::size_t k = 0; k < order.size(); ++k) {
    Matrix pre(n, g4);
    for (std::size_t r = 0; r < n; ++r) std::copy(b.begin(), b.end(), pre.row(r).begin());
    gemm_nn(steps[order[k]], wx, pre.view(), true);
    if (k > 0) gemm_nn(hiddens[k - 1], wh, pre.view(), true);  // the initial state is zero
    Matrix c(n, hidden);
    Matrix h(n, hidden);
    for (std::size_t r = 0; r < n; ++r) {
      auto p = pre.row(r);
      for (std::size_t u = 0; u < hidden; ++u) {
        const double ig = sigmoid(p[u]);
        const double fg = sigmoid(p[hidden + u]);
        const double gg = std::tanh(p[2 * hidden + u]);
        const double og = sigmoid(p[3 * hidden + u]);
        p[u] = ig;
        p[hidden + u] = fg;
        p[2 * hidden + u] = gg;
        p[3 * hidden + u] = og;
        const double c_prev = k > 0 ? cells[k - 1](r, u) : 0.0;
        const double cv = fg * c_prev + ig * gg;
        c(r, u) = cv;
        h(r, u) = og * std::tanh(cv);
      }
    }
    gates.push_back(std::move(pre));
    cells.push_back(std::move(c));
    hiddens.push_back(std::move(h));
  }
}

}  // namespace

BiRecurrentModel::BiRecurrentModel(std::size_t n_features, const BiRecurrentParams& params)
    : n_features_(n_features), params_(params) {
  if (params.hidden_size == 0) throw ConfigError("birecurrent: hidden_size must be > 0");
  if (params.timesteps == 0 || n_features % params.timesteps != 0) {
    throw ConfigError("birecurrent: timesteps must divide the feature count");
  }
  if (!(params.dropout_rate >= 0.0 && params.dropout_rate < 1.0)) {
    throw ConfigError("birecurrent: dropout_rate must lie in [0, 1)");
  }
  step_width_ = n_features / params.timesteps;
  const std::size_t h = params.hidden_size;
  std::size_t off = 0;
  auto take = [&off](std::size_t rows, std::size_t cols) {
    Block b{off, rows, cols};
    off += rows * cols;
    return b;
  };
  for (Direction* d : {&fwd_, &bwd_}) {
    d->wx = take(step_width_, 4 * h);
    d->wh = take(h, 4 * h);
    d->b = take(1, 4 * h);
  }
  head_w_ = take(2 * h, 1);
  head_b_ = take(1, 1);
  weights_.assign(off, 0.0);
}

void BiRecurrentModel::initialize(Rng& rng) {
  const double k_lstm = 1.0 / std::sqrt(static_cast<double>(params_.hidden_size));
  const double k_head = 1.0 / std::sqrt(static_cast<double>(2 * params_.hidden_size));
  const std::size_t head_begin = head_w_.offset;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double k = i < head_begin ? k_lstm : k_head;
    weights_[i] = rng.uniform(-k, k);
  }
}

void BiRecurrentModel::forward(ConstMatrixView x, Cache& cache, Rng* dropout_rng) const {
  const std::size_t n = x.rows;
  const std::size_t h = params_.hidden_size;
  const std::size_t t_steps = params_.timesteps;
  cache.steps.clear();
  for (std::size_t t = 0; t < t_steps; ++t) {
    Matrix s(n, step_width_);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < step_width_; ++j) s(r, j) = x(r, t * step_width_ + j);
    cache.steps.push_back(std::move(s));
  }
  cache.fwd.order.resize(t_steps);
  std::iota(cache.fwd.order.begin(), cache.fwd.order.end(), std::size_t{0});
  cache.bwd.order.assign(cache.fwd.order.rbegin(), cache.fwd.order.rend());

  for (auto [dir, dc] : {std::pair{&fwd_, &cache.fwd}, std::pair{&bwd_, &cache.bwd}}) {
    run_direction(block(dir->wx), block(dir->wh), block(dir->b).row(0), cache.steps, h, n, dc->order,
                  dc->gates, dc->c, dc->h);
  }

  cache.concat = Matrix(n, 2 * h);
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(cache.fwd.h.back().row(r).begin(), h, cache.concat.row(r).begin());
    std::copy_n(cache.bwd.h.back().row(r).begin(), h, cache.concat.row(r).begin() + static_cast<std::ptrdiff_t>(h));
  }
  cache.mask.clear();
  if (dropout_rng != nullptr && params_.dropout_rate > 0.0) {
    const double keep = 1.0 - params_.dropout_rate;
    cache.mask.resize(cache.concat.size());
    for (std::size_t i = 0; i < cache.mask.size(); ++i) {
      cache.mask[i] = dropout_rng->uniform() < params_.dropout_rate ? 0.0 : 1.0 / keep;
      cache.concat.values()[i] *= cache.mask[i];
    }
  }
  const auto w = block(head_w_);
  const double bias = weights_[head_b_.offset];
  cache.logits.assign(n, bias);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = cache.concat.row(r);
    double s = bias;
    for (std::size_t j = 0; j < 2 * h; ++j) s += row[j] * w.data[j];
    cache.logits[r] = s;
  }
}

double BiRecurrentModel::backward(ConstMatrixView x, std::span<const int> y, const Cache& cache,
                                  std::vector<double>* param_grad, Matrix* input_grad) const {
  const std::size_t n = x.rows;
  const std::size_t h = params_.hidden_size;
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  std::vector<double> dlogit(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double yr = static_cast<double>(y[r]);
    loss += bce_from_logit(cache.logits[r], yr);
    dlogit[r] = (sigmoid(cache.logits[r]) - yr) * inv_n;
  }
  loss *= inv_n;

  std::vector<double> scratch;
  std::vector<double>& g = param_grad != nullptr ? *param_grad : scratch;
  g.assign(weights_.size(), 0.0);

  const auto w = block(head_w_);
  double* gw = g.data() + head_w_.offset;
  Matrix dconcat(n, 2 * h);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = cache.concat.row(r);
    for (std::size_t j = 0; j < 2 * h; ++j) {
      gw[j] += row[j] * dlogit[r];
      double d = dlogit[r] * w.data[j];
      if (!cache.mask.empty()) d *= cache.mask[r * 2 * h + j];
      dconcat(r, j) = d;
    }
    g[head_b_.offset] += dlogit[r];
  }

  if (input_grad != nullptr) *input_grad = Matrix(n, n_features_);

  for (int which = 0; which < 2; ++which) {
    const Direction& dir = which == 0 ? fwd_ : bwd_;
    const Cache::Dir& dc = which == 0 ? cache.fwd : cache.bwd;
    const std::size_t col0 = which == 0 ? 0 : h;
    Matrix dh(n, h);
    Matrix dcell(n, h);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t u = 0; u < h; ++u) dh(r, u) = dconcat(r, col0 + u);

    const auto wx = block(dir.wx);
    const auto wh = block(dir.wh);
    auto gwx = grad_block(g, dir.wx);
    auto gwh = grad_block(g, dir.wh);
    double* gb = g.data() + dir.b.offset;

    for (std::size_t k = dc.order.size(); k-- > 0;) {
      const Matrix& gates = dc.gates[k];
      const Matrix& c = dc.c[k];
      Matrix dpre(n, 4 * h);
      for (std::size_t r = 0; r < n; ++r) {
        const auto gt = gates.row(r);
        auto dp = dpre.row(r);
        for (std::size_t u = 0; u < h; ++u) {
          const double ig = gt[u], fg = gt[h + u], gg = gt[2 * h + u], og = gt[3 * h + u];
          const double tc = std::tanh(c(r, u));
          const double c_prev = k > 0 ? dc.c[k - 1](r, u) : 0.0;
          const double dhv = dh(r, u);
          const double dcv = dcell(r, u) + dhv * og * (1.0 - tc * tc);
          dp[u] = dcv * gg * ig * (1.0 - ig);
          dp[h + u] = dcv * c_prev * fg * (1.0 - fg);
          dp[2 * h + u] = dcv * ig * (1.0 - gg * gg);
          dp[3 * h + u] = dhv * tc * og * (1.0 - og);
          dcell(r, u) = dcv * fg;
        }
        for (std::size_t q = 0; q < 4 * h; ++q) gb[q] += dp[q];
      }
      const Matrix& xt = cache.steps[dc.order[k]];
      gemm_tn(xt, dpre, gwx, true);
      if (input_grad != nullptr) {
        Matrix dx(n, step_width_);
        gemm_nt(dpre, wx, dx.view());
        const std::size_t t = dc.order[k];
        for (std::size_t r = 0; r < n; ++r)
          for (std::size_t j = 0; j < step_width_; ++j) (*input_grad)(r, t * step_width_ + j) += dx(r, j);
      }
      if (k > 0) {
        gemm_tn(dc.h[k - 1], dpre, gwh, true);
        gemm_nt(dpre, wh, dh.view());
      }
    }
  }
  return loss;
}

std::vector<double> BiRecurrentModel::predict_proba(ConstMatrixView x) const {
  check_width(x);
  if (x.rows == 0) return {};
  Cache cache;
  forward(x, cache, nullptr);
  std::vector<double> p(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) p[r] = sigmoid(cache.logits[r]);
  return p;
}

Matrix BiRecurrentModel::input_gradient(ConstMatrixView x, std::span<const int> y) const {
  check_width(x);
  if (y.size() != x.rows) throw ShapeError("birecurrent: label count does not match batch rows");
  if (x.rows == 0) return Matrix(0, n_features_);
  Cache cache;
  forward(x, cache, nullptr);
  Matrix grad;
  backward(x, y, cache, nullptr, &grad);
  return grad;
}

double BiRecurrentModel::loss_and_param_grad(ConstMatrixView x, std::span<const int> y, std::vector<double>& grad,
                                             Rng* dropout_rng) const {
  check_width(x);
  if (y.size() != x.rows || x.rows == 0) throw ShapeError("birecurrent: label count does not match batch rows");
  Cache cache;
  forward(x, cache, dropout_rng);
  return backward(x, y, cache, &grad, nullptr);
}

double BiRecurrentModel::loss(ConstMatrixView x, std::span<const int> y) const {
  check_width(x);
  if (y.size() != x.rows || x.rows == 0) throw ShapeError("birecurrent: label count does not match batch rows");
  Cache cache;
  forward(x, cache, nullptr);
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) total += bce_from_logit(cache.logits[r], static_cast<double>(y[r]));
  return total / static_cast<double>(x.rows);
}

nlohmann::json BiRecurrentModel::to_json() const {
  return {{"family", family()},
          {"n_features", n_features_},
          {"hyperparameters",
           {{"hidden_size", params_.hidden_size},
            {"head_width", 2 * params_.hidden_size},
            {"timesteps", params_.timesteps},
            {"dropout_rate", params_.dropout_rate},
            {"epochs", params_.epochs},
            {"batch_size", params_.batch_size},
            {"learning_rate", params_.learning_rate},
            {"seed", params_.seed}}},
          {"parameters", weights_}};
}

BiRecurrentModel BiRecurrentModel::from_json(const nlohmann::json& j) {
  const auto& hp = j.at("hyperparameters");
  BiRecurrentParams p;
  p.hidden_size = hp.at("hidden_size").get<std::size_t>();
  p.timesteps = hp.at("timesteps").get<std::size_t>();
  p.dropout_rate = hp.at("dropout_rate").get<double>();
  p.epochs = hp.at("epochs").get<std::size_t>();
  p.batch_size = hp.at("batch_size").get<std::size_t>();
  p.learning_rate = hp.at("learning_rate").get<double>();
  p.seed = hp.at("seed").get<std::uint64_t>();
  BiRecurrentModel m(j.at("n_features").get<std::size_t>(), p);
  auto w = j.at("parameters").get<std::vector<double>>();
  if (w.size() != m.weights_.size()) throw SchemaError("birecurrent: parameter count mismatch");
  m.weights_ = std::move(w);
  return m;
}

BiRecurrentModel train_birecurrent(const Dataset& ds, const BiRecurrentParams& params) {
  const auto& train = ds.split.train;
  const auto labels = ds.part_labels(SplitPart::train);
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw TrainingError("birecurrent: train split must contain both classes");
  }
  if (params.batch_size == 0) throw ConfigError("birecurrent: batch_size must be > 0");

  BiRecurrentModel model(ds.n_features(), params);
  Rng init_rng = Rng::derive(params.seed, 11);
  Rng order_rng = Rng::derive(params.seed, 12);
  Rng dropout_rng = Rng::derive(params.seed, 13);
  model.initialize(init_rng);

  AdamState adam(model.parameters().size(), params.learning_rate);
  std::vector<std::size_t> order(train.begin(), train.end());
  std::vector<double> grad;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t end = std::min(order.size(), start + params.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = ds.features.select_rows(idx);
      std::vector<int> yb;
      yb.reserve(idx.size());
      for (std::size_t i : idx) yb.push_back(ds.labels[i]);
      model.loss_and_param_grad(xb, yb, grad, &dropout_rng);
      adam_step(model.parameters(), grad, adam);
    }
  }
  return model;
}

}  // namespace advclaim
