#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advclaim/errors.hpp"
#include "advclaim/models/classifier.hpp"

namespace advclaim {

// The handle's query budget ran out. Raised before the offending rows are scored.
class QueryBudgetExceeded : public Error {
 public:
  using Error::Error;
};

struct QueryRecord {
  std::string kind;  // "score" or "gradient"
  std::size_t rows = 0;
};

// Score-only view of a detector. It holds closures, never the model, so
// nothing reachable through it exposes parameters. Copies share one counter.
class SurrogateHandle {
 public:
  using ScoreFn = std::function<std::vector<double>(ConstMatrixView)>;
  // d mean_i BCE(S(x_i), y_i) / dx
  using LossGradFn = std::function<Matrix(ConstMatrixView, std::span<const int>)>;

  // budget 0 means unlimited.
  SurrogateHandle(std::size_t n_features, ScoreFn score, LossGradFn loss_grad = {}, std::size_t budget = 0);

  std::size_t n_features() const noexcept { return n_features_; }
  bool differentiable() const noexcept { return static_cast<bool>(loss_grad_); }

  // Throws ProtocolError if the oracle returns a value outside [0, 1] or the
  // wrong count.
  std::vector<double> score(ConstMatrixView x) const;
  Matrix loss_gradient(ConstMatrixView x, std::span<const int> y) const;

  std::size_t queries() const noexcept { return state_->queries.load(); }
  std::size_t budget() const noexcept { return budget_; }
  std::vector<QueryRecord> query_log() const;
  // Summary of the log: calls and rows per kind; parameter_accesses is
  // always 0 since the handle has no path to parameters.
  nlohmann::json audit() const;

 private:
  void charge(const char* kind, std::size_t rows) const;

  struct State {
    std::atomic<std::size_t> queries{0};
    std::mutex log_mutex;
    std::vector<QueryRecord> log;
  };

  std::size_t n_features_;
  ScoreFn score_;
  LossGradFn loss_grad_;
  std::size_t budget_;
  std::shared_ptr<State> state_;
};

// The model must outlive the handle. Differentiable models also expose the
// loss gradient.
SurrogateHandle attach_target_as_surrogate(const Classifier& model, std::size_t budget = 0);

}  // namespace advclaim
