#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/models/classifier.hpp"

namespace advclaim {

enum class TreeGrowth { level_wise, leaf_wise };

const char* to_string(TreeGrowth g) noexcept;
TreeGrowth tree_growth_from_string(const std::string& s);

struct TreeParams {
  std::size_t n_trees = 100;
  std::size_t max_leaves = 8;
  double lambda_reg = 1.0;
  double shrinkage = 0.1;
  double min_child_hessian = 1.0;
  TreeGrowth growth = TreeGrowth::level_wise;
  // 0 = exact search over sorted unique values; otherwise candidate
  // thresholds come from this many quantile bins fitted once per feature.
  std::size_t histogram_bins = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaf output before shrinkage

  bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  // x[feature] < threshold goes left.
  double predict(std::span<const double> x) const;
  std::size_t leaf_count() const;
};

// Second-order quantities for the logistic loss.
inline double leaf_weight(double g_sum, double h_sum, double lambda) { return -g_sum / (h_sum + lambda); }
double split_gain(double gl, double hl, double gr, double hr, double lambda);

class TreeEnsemble final : public Classifier {
 public:
  TreeEnsemble(std::size_t n_features, const TreeParams& params, double base_score = 0.0)
      : n_features_(n_features), params_(params), base_score_(base_score) {}

  std::string family() const override { return "tree_ensemble"; }
  std::size_t n_features() const override { return n_features_; }
  std::vector<double> predict_proba(ConstMatrixView x) const override;
  nlohmann::json to_json() const override;
  static TreeEnsemble from_json(const nlohmann::json& j);

  // base_score + shrinkage * sum of tree outputs (the logit).
  double raw_score(std::span<const double> x) const;

  const TreeParams& params() const noexcept { return params_; }
  double base_score() const noexcept { return base_score_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }
  void add_tree(Tree tree) { trees_.push_back(std::move(tree)); }

 private:
  std::size_t n_features_;
  TreeParams params_;
  double base_score_;
  std::vector<Tree> trees_;
};

TreeEnsemble fit_gbt(ConstMatrixView x, std::span<const int> y, const TreeParams& params);
TreeEnsemble train_gbt(const Dataset& ds, const TreeParams& params);

}  // namespace advclaim
