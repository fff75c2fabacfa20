#include "advclaim/models/classifier.hpp"

#include "advclaim/errors.hpp"
#include "advclaim/models/birecurrent.hpp"
#include "advclaim/models/knn.hpp"
#include "advclaim/models/margin.hpp"
#include "advclaim/models/tree_ensemble.hpp"

namespace advclaim {

std::vector<int> threshold_labels(std::span<const double> proba, double threshold) {
  std::vector<int> out(proba.size());
  for (std::size_t i = 0; i < proba.size(); ++i) out[i] = proba[i] > threshold ? 1 : 0;
  return out;
}

std::vector<int> Classifier::predict_label(ConstMatrixView x, double threshold) const {
  return threshold_labels(predict_proba(x), threshold);
}

Matrix Classifier::input_gradient(ConstMatrixView, std::span<const int>) const { throw NotDifferentiable(family()); }

void Classifier::check_width(ConstMatrixView x) const {
  if (x.cols != n_features()) {
    throw ShapeError(family() + ": input width " + std::to_string(x.cols) + " does not match model width " +
                     std::to_string(n_features()));
  }
}

std::unique_ptr<Classifier> classifier_from_json(const nlohmann::json& j) {
  const std::string fam = j.at("family").get<std::string>();
  if (fam == "birecurrent") return std::make_unique<BiRecurrentModel>(BiRecurrentModel::from_json(j));
  if (fam == "tree_ensemble") return std::make_unique<TreeEnsemble>(TreeEnsemble::from_json(j));
  if (fam == "knn") return std::make_unique<KnnModel>(KnnModel::from_json(j));
  if (fam == "margin") return std::make_unique<MarginModel>(MarginModel::from_json(j));
  throw SchemaError("unknown model family '" + fam + "'");
}

}  // namespace advclaim
