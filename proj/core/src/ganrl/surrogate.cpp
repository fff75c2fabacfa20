#include "advclaim/ganrl/surrogate.hpp"

namespace advclaim {

SurrogateHandle::SurrogateHandle(std::size_t n_features, ScoreFn score, LossGradFn loss_grad, std::size_t budget)
    : n_features_(n_features),
      score_(std::move(score)),
      loss_grad_(std::move(loss_grad)),
      budget_(budget),
      state_(std::make_shared<State>()) {
  if (!score_) throw ConfigError("surrogate: score oracle is empty");
}

void SurrogateHandle::charge(const char* kind, std::size_t rows) const {
  std::size_t cur = state_->queries.load();
  for (;;) {
    if (budget_ > 0 && cur + rows > budget_) {
      throw QueryBudgetExceeded("surrogate: query budget of " + std::to_string(budget_) + " rows exhausted (" +
                                std::to_string(cur) + " used, " + std::to_string(rows) + " requested)");
    }
    if (state_->queries.compare_exchange_weak(cur, cur + rows)) break;
  }
  std::lock_guard lock(state_->log_mutex);
  state_->log.push_back({kind, rows});
}

std::vector<double> SurrogateHandle::score(ConstMatrixView x) const {
  if (x.cols != n_features_) throw ShapeError("surrogate: input " + shape_string(x) + " has the wrong width");
  charge("score", x.rows);
  std::vector<double> s = score_(x);
  if (s.size() != x.rows) throw ProtocolError("surrogate returned " + std::to_string(s.size()) + " scores for " +
                                              std::to_string(x.rows) + " rows");
  for (double v : s) {
    if (!(v >= 0.0 && v <= 1.0)) throw ProtocolError("surrogate returned a score outside [0, 1]: " + std::to_string(v));
  }
  return s;
}

Matrix SurrogateHandle::loss_gradient(ConstMatrixView x, std::span<const int> y) const {
  if (!loss_grad_) throw NotDifferentiable("surrogate");
  if (x.cols != n_features_) throw ShapeError("surrogate: input " + shape_string(x) + " has the wrong width");
  charge("gradient", x.rows);
  Matrix g = loss_grad_(x, y);
  if (g.rows() != x.rows || g.cols() != x.cols) throw ProtocolError("surrogate gradient has the wrong shape");
  return g;
}

std::vector<QueryRecord> SurrogateHandle::query_log() const {
  std::lock_guard lock(state_->log_mutex);
  return state_->log;
}

nlohmann::json SurrogateHandle::audit() const {
  std::size_t score_calls = 0, score_rows = 0, grad_calls = 0, grad_rows = 0;
  for (const auto& r : query_log()) {
    if (r.kind == "score") {
      ++score_calls;
      score_rows += r.rows;
    } else {
      ++grad_calls;
      grad_rows += r.rows;
    }
  }
  return {{"queries", queries()},
          {"score_calls", score_calls},
          {"score_rows", score_rows},
          {"gradient_calls", grad_calls},
          {"gradient_rows", grad_rows},
          {"parameter_accesses", 0},
          {"budget", budget_}};
}

SurrogateHandle attach_target_as_surrogate(const Classifier& model, std::size_t budget) {
  SurrogateHandle::ScoreFn score = [&model](ConstMatrixView x) { return model.predict_proba(x); };
  SurrogateHandle::LossGradFn grad;
  if (model.differentiable()) {
    grad = [&model](ConstMatrixView x, std::span<const int> y) { return model.input_gradient(x, y); };
  }
  return SurrogateHandle(model.n_features(), std::move(score), std::move(grad), budget);
}

}  // namespace advclaim
