#include "advclaim/ganrl/mlp.hpp"

#include <cmath>

#include "advclaim/errors.hpp"

namespace advclaim {

Mlp::Mlp(std::vector<std::size_t> widths, Activation hidden, Activation output)
    : widths_(std::move(widths)), hidden_(hidden), output_(output) {
  if (widths_.size() < 2) throw ConfigError("mlp: need at least input and output widths");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    if (widths_[l] == 0 || widths_[l + 1] == 0) throw ConfigError("mlp: zero layer width");
    offsets_.push_back(total);
    total += widths_[l] * widths_[l + 1] + widths_[l + 1];
  }
  params_.assign(total, 0.0);
}

ConstMatrixView Mlp::weight(std::size_t l) const {
  return {params_.data() + offsets_[l], widths_[l], widths_[l + 1]};
}

std::span<const double> Mlp::bias(std::size_t l) const {
  return {params_.data() + offsets_[l] + widths_[l] * widths_[l + 1], widths_[l + 1]};
}

void Mlp::initialize(Rng& rng) {
  for (std::size_t l = 0; l < n_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    const std::size_t n = widths_[l] * widths_[l + 1] + widths_[l + 1];
    for (std::size_t i = 0; i < n; ++i) params_[offsets_[l] + i] = rng.uniform(-bound, bound);
  }
}

Matrix Mlp::forward(ConstMatrixView x) const {
  Tape tape;
  return forward(x, tape);
}

Matrix Mlp::forward(ConstMatrixView x, Tape& tape) const {
  if (x.cols != input_width()) {
    throw ShapeError("mlp: input " + shape_string(x) + " does not match input width " +
                     std::to_string(input_width()));
  }
  tape.inputs.clear();
  tape.pre.clear();
  Matrix cur = Matrix::from_view(x);
  for (std::size_t l = 0; l < n_layers(); ++l) {
    Matrix z = affine(cur, weight(l), bias(l));
    const Activation& act = l + 1 == n_layers() ? output_ : hidden_;
    Matrix a = activation(act, z);
    tape.inputs.push_back(std::move(cur));
    tape.pre.push_back(std::move(z));
    cur = std::move(a);
  }
  tape.output = cur;
  return cur;
}

Matrix Mlp::backward(const Tape& tape, ConstMatrixView grad_out, std::vector<double>& param_grad) const {
  if (param_grad.empty()) param_grad.assign(params_.size(), 0.0);
  if (param_grad.size() != params_.size()) throw ShapeError("mlp: parameter gradient has the wrong size");
  if (grad_out.rows != tape.output.rows() || grad_out.cols != tape.output.cols()) {
    throw ShapeError("mlp: output gradient " + shape_string(grad_out) + " does not match output " +
                     shape_string(tape.output));
  }
  Matrix delta = Matrix::from_view(grad_out);
  for (std::size_t l = n_layers(); l-- > 0;) {
    const Activation& act = l + 1 == n_layers() ? output_ : hidden_;
    const Matrix& z = tape.pre[l];
    const Matrix& out = l + 1 == n_layers() ? tape.output : tape.inputs[l + 1];
    for (std::size_t i = 0; i < delta.size(); ++i) {
      delta.values()[i] *= activation_slope(act, z.values()[i], out.values()[i]);
    }
    const std::size_t in = widths_[l];
    const std::size_t o = widths_[l + 1];
    MatrixView gw{param_grad.data() + offsets_[l], in, o};
    gemm_tn(tape.inputs[l], delta, gw, true);
    double* gb = param_grad.data() + offsets_[l] + in * o;
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      for (std::size_t c = 0; c < o; ++c) gb[c] += delta(r, c);
    }
    Matrix prev(delta.rows(), in);
    gemm_nt(delta, weight(l), prev.view());
    delta = std::move(prev);
  }
  return delta;
}

nlohmann::json activation_to_json(const Activation& act) {
  switch (act.kind) {
    case ActivationKind::sigmoid: return {{"kind", "sigmoid"}};
    case ActivationKind::tanh: return {{"kind", "tanh"}};
    case ActivationKind::leaky_relu: return {{"kind", "leaky_relu"}, {"slope", act.slope}};
    case ActivationKind::identity: return {{"kind", "identity"}};
  }
  return {};
}

Activation activation_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "sigmoid") return Activation::sigmoid();
  if (kind == "tanh") return Activation::tanh();
  if (kind == "leaky_relu") return Activation::leaky_relu(j.at("slope").get<double>());
  if (kind == "identity") return Activation::identity();
  throw SchemaError("unknown activation '" + kind + "'");
}

nlohmann::json Mlp::to_json() const {
  return {{"widths", widths_},
          {"hidden_activation", activation_to_json(hidden_)},
          {"output_activation", activation_to_json(output_)},
          {"parameters", params_}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp m(j.at("widths").get<std::vector<std::size_t>>(), activation_from_json(j.at("hidden_activation")),
        activation_from_json(j.at("output_activation")));
  auto p = j.at("parameters").get<std::vector<double>>();
  if (p.size() != m.params_.size()) throw SchemaError("mlp: parameter count does not match widths");
  require_finite(p, "mlp parameters");
  m.params_ = std::move(p);
  return m;
}

}  // namespace advclaim
