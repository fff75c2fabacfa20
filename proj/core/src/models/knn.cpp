#include "advclaim/models/knn.hpp"

#include <algorithm>
#include <numeric>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/parallel.hpp"

namespace advclaim {

KnnModel::KnnModel(Matrix train_x, std::vector<int> train_y, std::size_t k)
    : train_x_(std::move(train_x)), train_y_(std::move(train_y)), k_(k) {
  if (k_ % 2 == 0) throw ConfigError("knn: k must be odd, got " + std::to_string(k_));
  if (k_ > train_x_.rows()) throw ConfigError("knn: k exceeds the number of training rows");
  if (train_y_.size() != train_x_.rows()) throw ShapeError("knn: label count does not match rows");
}

std::vector<std::size_t> KnnModel::neighbours(std::span<const double> query) const {
  const std::size_t n = train_x_.rows();
  std::vector<std::pair<double, std::size_t>> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = train_x_.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) s += (row[j] - query[j]) * (row[j] - query[j]);
    d[i] = {s, i};
  }
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k_), d.end());
  std::vector<std::size_t> out(k_);
  for (std::size_t i = 0; i < k_; ++i) out[i] = d[i].second;
  return out;
}

std::vector<double> KnnModel::predict_proba(ConstMatrixView x) const {
  check_width(x);
  std::vector<double> p(x.rows);
  parallel_for(x.rows, [&](std::size_t r) {
    const auto nb = neighbours(x.row(r));
    std::size_t votes = 0;
    for (std::size_t i : nb) votes += static_cast<std::size_t>(train_y_[i]);
    p[r] = static_cast<double>(votes) / static_cast<double>(k_);
  });
  return p;
}

nlohmann::json KnnModel::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < train_x_.rows(); ++i) {
    const auto r = train_x_.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return {{"family", family()},
          {"n_features", n_features()},
          {"hyperparameters", {{"k", k_}}},
          {"train_labels", train_y_},
          {"train_features", std::move(rows)}};
}

KnnModel KnnModel::from_json(const nlohmann::json& j) {
  const auto f = j.at("n_features").get<std::size_t>();
  const auto& rows = j.at("train_features");
  Matrix x(rows.size(), f);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i].get<std::vector<double>>();
    if (r.size() != f) throw SchemaError("knn: stored row has wrong width");
    std::copy(r.begin(), r.end(), x.row(i).begin());
  }
  return KnnModel(std::move(x), j.at("train_labels").get<std::vector<int>>(),
                  j.at("hyperparameters").at("k").get<std::size_t>());
}

KnnModel train_knn(const Dataset& ds, std::size_t k) {
  return KnnModel(ds.part_features(SplitPart::train), ds.part_labels(SplitPart::train), k);
}

}  // namespace advclaim
