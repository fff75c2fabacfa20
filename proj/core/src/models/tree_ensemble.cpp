#include "advclaim/models/tree_ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "advclaim/errors.hpp"
#include "advclaim/numkit/ops.hpp"

namespace advclaim {

const char* to_string(TreeGrowth g) noexcept { return g == TreeGrowth::level_wise ? "level_wise" : "leaf_wise"; }

TreeGrowth tree_growth_from_string(const std::string& s) {
  if (s == "level_wise") return TreeGrowth::level_wise;
  if (s == "leaf_wise") return TreeGrowth::leaf_wise;
  throw ConfigError("unknown tree growth '" + s + "' (expected level_wise or leaf_wise)");
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) {
  const auto score = [lambda](double g, double h) { return g * g / (h + lambda); };
  return 0.5 * (score(gl, hl) + score(gr, hr) - score(gl + gr, hl + hr));
}

double Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
  }
  return nodes[i].weight;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double TreeEnsemble::raw_score(std::span<const double> x) const {
  double s = 0.0;
  for (const Tree& t : trees_) s += t.predict(x);
  return base_score_ + params_.shrinkage * s;
}

std::vector<double> TreeEnsemble::predict_proba(ConstMatrixView x) const {
  check_width(x);
  std::vector<double> p(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) p[r] = sigmoid(raw_score(x.row(r)));
  return p;
}

nlohmann::json TreeEnsemble::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back({{"leaf", n.weight}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                         {"weight", n.weight}});
      }
    }
    trees.push_back(std::move(nodes));
  }
  return {{"family", family()},
          {"n_features", n_features_},
          {"base_score", base_score_},
          {"hyperparameters",
           {{"n_trees", params_.n_trees},
            {"max_leaves", params_.max_leaves},
            {"lambda_reg", params_.lambda_reg},
            {"shrinkage", params_.shrinkage},
            {"min_child_hessian", params_.min_child_hessian},
            {"growth", to_string(params_.growth)},
            {"histogram_bins", params_.histogram_bins}}},
          {"trees", std::move(trees)}};
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& j) {
  const auto& hp = j.at("hyperparameters");
  TreeParams p;
  p.n_trees = hp.at("n_trees").get<std::size_t>();
  p.max_leaves = hp.at("max_leaves").get<std::size_t>();
  p.lambda_reg = hp.at("lambda_reg").get<double>();
  p.shrinkage = hp.at("shrinkage").get<double>();
  p.min_child_hessian = hp.at("min_child_hessian").get<double>();
  p.growth = tree_growth_from_string(hp.at("growth").get<std::string>());
  p.histogram_bins = hp.at("histogram_bins").get<std::size_t>();
  const auto n_features = j.at("n_features").get<std::size_t>();
  TreeEnsemble model(n_features, p, j.at("base_score").get<double>());
  for (const auto& jt : j.at("trees")) {
    Tree t;
    for (const auto& jn : jt) {
      TreeNode n;
      if (jn.contains("leaf")) {
        n.weight = jn.at("leaf").get<double>();
      } else {
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.weight = jn.at("weight").get<double>();
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features) {
          throw SchemaError("tree node feature index out of range");
        }
      }
      t.nodes.push_back(n);
    }
    for (const TreeNode& n : t.nodes) {
      if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= t.nodes.size() ||
                           static_cast<std::size_t>(n.right) >= t.nodes.size())) {
        throw SchemaError("tree node child index out of range");
      }
    }
    if (t.nodes.empty()) throw SchemaError("tree without nodes");
    model.add_tree(std::move(t));
  }
  return model;
}

namespace {

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

struct Pending {
  int node = 0;
  std::vector<std::size_t> samples;
  double g = 0.0;
  double h = 0.0;
  Split best;
};

class TreeBuilder {
 public:
  TreeBuilder(ConstMatrixView x, const TreeParams& params) : x_(x), params_(params) {
    if (params.histogram_bins > 0) fit_bins();
  }

  Tree build(const std::vector<double>& grad, const std::vector<double>& hess) {
    grad_ = &grad;
    hess_ = &hess;
    Tree tree;
    tree.nodes.emplace_back();
    Pending root;
    root.samples.resize(x_.rows);
    for (std::size_t i = 0; i < x_.rows; ++i) root.samples[i] = i;
    finalize_stats(root, tree);

    std::size_t leaves = 1;
    if (params_.growth == TreeGrowth::level_wise) {
      std::vector<Pending> frontier;
      frontier.push_back(std::move(root));
      while (!frontier.empty() && leaves < params_.max_leaves) {
        std::vector<Pending> next;
        for (Pending& p : frontier) {
          if (leaves >= params_.max_leaves) break;
          if (!(p.best.gain > 0.0)) continue;
          auto [l, r] = split_node(p, tree);
          ++leaves;
          next.push_back(std::move(l));
          next.push_back(std::move(r));
        }
        frontier = std::move(next);
      }
    } else {
      std::vector<Pending> open;
      open.push_back(std::move(root));
      while (leaves < params_.max_leaves) {
        auto best = open.end();
        for (auto it = open.begin(); it != open.end(); ++it) {
          if (!(it->best.gain > 0.0)) continue;
          if (best == open.end() || it->best.gain > best->best.gain ||
              (it->best.gain == best->best.gain && it->node < best->node)) {
            best = it;
          }
        }
        if (best == open.end()) break;
        Pending p = std::move(*best);
        open.erase(best);
        auto [l, r] = split_node(p, tree);
        ++leaves;
        open.push_back(std::move(l));
        open.push_back(std::move(r));
      }
    }
    return tree;
  }

 private:
  void fit_bins() {
    thresholds_.assign(x_.cols, {});
    bin_of_.assign(x_.rows * x_.cols, 0);
    const std::size_t bins = params_.histogram_bins;
    for (std::size_t f = 0; f < x_.cols; ++f) {
      std::vector<double> u(x_.rows);
      for (std::size_t i = 0; i < x_.rows; ++i) u[i] = x_(i, f);
      std::sort(u.begin(), u.end());
      u.erase(std::unique(u.begin(), u.end()), u.end());
      auto& thr = thresholds_[f];
      const std::size_t m = u.size();
      if (m <= bins) {
        for (std::size_t i = 1; i < m; ++i) thr.push_back(0.5 * (u[i - 1] + u[i]));
      } else {
        for (std::size_t q = 1; q < bins; ++q) {
          const std::size_t pos = q * m / bins;
          thr.push_back(0.5 * (u[pos - 1] + u[pos]));
        }
        thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
      }
      for (std::size_t i = 0; i < x_.rows; ++i) {
        bin_of_[i * x_.cols + f] =
            static_cast<std::size_t>(std::upper_bound(thr.begin(), thr.end(), x_(i, f)) - thr.begin());
      }
    }
  }

  void finalize_stats(Pending& p, Tree& tree) const {
    p.g = 0.0;
    p.h = 0.0;
    for (std::size_t i : p.samples) {
      p.g += (*grad_)[i];
      p.h += (*hess_)[i];
    }
    tree.nodes[static_cast<std::size_t>(p.node)].weight = leaf_weight(p.g, p.h, params_.lambda_reg);
    p.best = params_.histogram_bins > 0 ? best_split_hist(p) : best_split_exact(p);
  }

  void consider(Split& best, int f, double thr, double gl, double hl, const Pending& p) const {
    const double gr = p.g - gl;
    const double hr = p.h - hl;
    if (hl < params_.min_child_hessian || hr < params_.min_child_hessian) return;
    const double gain = split_gain(gl, hl, gr, hr, params_.lambda_reg);
    if (gain > best.gain) best = {gain, f, thr};
  }

  Split best_split_exact(const Pending& p) const {
    Split best;
    std::vector<std::pair<double, std::size_t>> order(p.samples.size());
    for (std::size_t f = 0; f < x_.cols; ++f) {
      for (std::size_t k = 0; k < p.samples.size(); ++k) order[k] = {x_(p.samples[k], f), p.samples[k]};
      std::sort(order.begin(), order.end());
      double gl = 0.0, hl = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        gl += (*grad_)[order[k].second];
        hl += (*hess_)[order[k].second];
        if (order[k].first < order[k + 1].first) {
          consider(best, static_cast<int>(f), 0.5 * (order[k].first + order[k + 1].first), gl, hl, p);
        }
      }
    }
    return best;
  }

  Split best_split_hist(const Pending& p) const {
    Split best;
    for (std::size_t f = 0; f < x_.cols; ++f) {
      const auto& thr = thresholds_[f];
      if (thr.empty()) continue;
      std::vector<double> gb(thr.size() + 1, 0.0), hb(thr.size() + 1, 0.0);
      for (std::size_t i : p.samples) {
        const std::size_t b = bin_of_[i * x_.cols + f];
        gb[b] += (*grad_)[i];
        hb[b] += (*hess_)[i];
      }
      double gl = 0.0, hl = 0.0;
      for (std::size_t b = 0; b < thr.size(); ++b) {
        gl += gb[b];
        hl += hb[b];
        consider(best, static_cast<int>(f), thr[b], gl, hl, p);
      }
    }
    return best;
  }

  std::pair<Pending, Pending> split_node(Pending& p, Tree& tree) const {
    Pending l, r;
    l.node = static_cast<int>(tree.nodes.size());
    r.node = l.node + 1;
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    TreeNode& n = tree.nodes[static_cast<std::size_t>(p.node)];
    n.feature = p.best.feature;
    n.threshold = p.best.threshold;
    n.left = l.node;
    n.right = r.node;
    const auto f = static_cast<std::size_t>(p.best.feature);
    for (std::size_t i : p.samples) (x_(i, f) < p.best.threshold ? l.samples : r.samples).push_back(i);
    finalize_stats(l, tree);
    finalize_stats(r, tree);
    return {std::move(l), std::move(r)};
  }

  ConstMatrixView x_;
  const TreeParams& params_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  std::vector<std::vector<double>> thresholds_;
  std::vector<std::size_t> bin_of_;
};

}  // namespace

TreeEnsemble fit_gbt(ConstMatrixView x, std::span<const int> y, const TreeParams& params) {
  if (params.n_trees < 1) throw ConfigError("gbt: n_trees must be >= 1");
  if (params.max_leaves < 2) throw ConfigError("gbt: max_leaves must be >= 2");
  if (params.lambda_reg < 0.0) throw ConfigError("gbt: lambda_reg must be >= 0");
  if (y.size() != x.rows || x.rows == 0) throw ShapeError("gbt: label count does not match rows");

  TreeEnsemble model(x.cols, params, 0.0);
  TreeBuilder builder(x, params);
  std::vector<double> score(x.rows, model.base_score());
  std::vector<double> grad(x.rows), hess(x.rows);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    for (std::size_t i = 0; i < x.rows; ++i) {
      const double p = sigmoid(score[i]);
      grad[i] = p - static_cast<double>(y[i]);
      hess[i] = p * (1.0 - p);
    }
    Tree tree = builder.build(grad, hess);
    for (std::size_t i = 0; i < x.rows; ++i) score[i] += params.shrinkage * tree.predict(x.row(i));
    model.add_tree(std::move(tree));
  }
  return model;
}

TreeEnsemble train_gbt(const Dataset& ds, const TreeParams& params) {
  const Matrix x = ds.part_features(SplitPart::train);
  const std::vector<int> y = ds.part_labels(SplitPart::train);
  return fit_gbt(x, y, params);
}

}  // namespace advclaim
