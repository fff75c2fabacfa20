#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advclaim/data/synth.hpp"
#include "advclaim/errors.hpp"
#include "advclaim/models/birecurrent.hpp"
#include "advclaim/models/knn.hpp"
#include "advclaim/models/margin.hpp"
#include "advclaim/models/model_io.hpp"
#include "advclaim/models/tree_ensemble.hpp"
#include "advclaim/numkit/ops.hpp"
#include "test_support.hpp"

using namespace advclaim;

namespace {

double test_accuracy(const Classifier& m, const Dataset& ds) {
  const Matrix xt = ds.part_features(SplitPart::test);
  const auto y = ds.part_labels(SplitPart::test);
  const auto p = m.predict_label(xt);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hit += p[i] == y[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(y.size());
}

BiRecurrentModel small_lstm(std::size_t f, std::size_t t, std::uint64_t seed) {
  BiRecurrentParams p;
  p.hidden_size = 4;
  p.timesteps = t;
  p.seed = seed;
  BiRecurrentModel m(f, p);
  Rng rng(seed);
  m.initialize(rng);
  // Scale weights up so gates leave the linear regime.
  for (double& w : m.parameters()) w *= 3.0;
  return m;
}

const Dataset& synth_default() {
  static const Dataset ds = synth_generate(SynthConfig{});
  return ds;
}

}  // namespace

TEST_CASE("lstm parameter gradient matches central differences") {
  Rng rng(31);
  for (std::size_t t : {std::size_t{1}, std::size_t{2}, std::size_t{3}}) {
    BiRecurrentModel m = small_lstm(6, t, 100 + t);
    const Matrix x = test::random_matrix(rng, 5, 6, 0.0, 1.0);
    const std::vector<int> y{1, 0, 1, 1, 0};
    std::vector<double> grad;
    m.loss_and_param_grad(x, y, grad);
    const auto coords = test::sample_coords(rng, grad.size(), 40);
    std::vector<double> analytic, numeric;
    const double h = 1e-6;
    for (std::size_t c : coords) {
      auto params = m.parameters();
      const double keep = params[c];
      params[c] = keep + h;
      const double up = m.loss(x, y);
      params[c] = keep - h;
      const double down = m.loss(x, y);
      params[c] = keep;
      numeric.push_back((up - down) / (2 * h));
      analytic.push_back(grad[c]);
    }
    CHECK(test::rel_err(analytic, numeric) <= 1e-4);
  }
}

TEST_CASE("lstm input gradient matches finite_diff_grad") {
  Rng rng(32);
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t t = 1 + static_cast<std::size_t>(rep % 2);
    BiRecurrentModel m = small_lstm(4, t, 200 + static_cast<std::uint64_t>(rep));
    const Matrix x = test::random_matrix(rng, 3, 4, 0.0, 1.0);
    std::vector<int> y(3);
    for (int& v : y) v = static_cast<int>(rng.uniform_index(2));
    const Matrix g = m.input_gradient(x, y);
    const Matrix fd = finite_diff_grad([&](const Matrix& z) { return m.loss(z, y); }, x, 1e-6);
    CHECK(relative_error(g.values(), fd.values()) <= 1e-4);
  }
}

TEST_CASE("lstm saturated prediction has vanishing input gradient") {
  BiRecurrentModel m = small_lstm(4, 1, 5);
  auto params = m.parameters();
  params[params.size() - 1] = 40.0;  // head bias
  Rng rng(1);
  const Matrix x = test::random_matrix(rng, 4, 4, 0.0, 1.0);
  for (double p : m.predict_proba(x)) CHECK(p >= 1.0 - 1e-6);
  const std::vector<int> y{1, 1, 1, 1};
  const Matrix g = m.input_gradient(x, y);
  double norm = 0.0;
  for (double v : g.values()) norm += v * v;
  CHECK(std::sqrt(norm) <= 1e-4);
}

TEST_CASE("lstm with zero epochs stays near one half") {
  BiRecurrentParams p;
  p.epochs = 0;
  p.seed = 7;
  const auto m = train_birecurrent(synth_default(), p);
  for (double v : m.predict_proba(synth_default().features)) CHECK(std::abs(v - 0.5) <= 0.2);
}

TEST_CASE("lstm trained on separable synth data") {
  BiRecurrentParams p;
  p.seed = 7;
  const auto m = train_birecurrent(synth_default(), p);
  CHECK(test_accuracy(m, synth_default()) >= 0.85);

  // Per-row purity: batch composition does not change a row's score.
  const Matrix xt = synth_default().part_features(SplitPart::test);
  const auto batch = m.predict_proba(xt);
  for (std::size_t i = 0; i < 20; ++i) {
    const Matrix row = xt.select_rows(std::vector<std::size_t>{i});
    CHECK(m.predict_proba(row)[0] == batch[i]);
  }
  CHECK(m.predict_proba(xt) == batch);
  CHECK(m.params().hidden_size == 220);
}

TEST_CASE("lstm single-class training split is rejected") {
  Matrix x(6, 2, std::vector<double>(12, 0.5));
  const Dataset ds = test::make_dataset(x, {1, 1, 1, 1, 1, 1});
  BiRecurrentParams p;
  p.hidden_size = 2;
  CHECK_THROWS_AS((void)train_birecurrent(ds, p), TrainingError);
}

TEST_CASE("gbt stump separates a perfectly separable feature") {
  const Matrix x{{0.1, 0.5}, {0.2, 0.5}, {0.8, 0.5}, {0.9, 0.5}};
  const std::vector<int> y{0, 0, 1, 1};
  TreeParams p;
  p.n_trees = 1;
  p.max_leaves = 2;
  p.min_child_hessian = 0.0;
  const TreeEnsemble m = fit_gbt(x, y, p);
  CHECK(m.trees().size() == 1);
  CHECK(m.trees()[0].nodes[0].feature == 0);
  CHECK(m.predict_label(x) == y);
}

TEST_CASE("gbt leaf weights equal the closed form") {
  const Matrix x{{0.0}, {1.0}};
  const std::vector<int> y{0, 1};
  TreeParams p;
  p.n_trees = 1;
  p.max_leaves = 2;
  p.lambda_reg = 0.0;
  p.min_child_hessian = 0.0;
  const TreeEnsemble m = fit_gbt(x, y, p);
  const Tree& t = m.trees()[0];
  REQUIRE(t.leaf_count() == 2);
  // g = sigma(0) - y, h = sigma(0)(1 - sigma(0)) at base score 0.
  const double h = 0.25;
  CHECK(std::abs(t.predict(std::vector<double>{0.0}) - (-(0.5 - 0.0) / h)) <= 1e-9);
  CHECK(std::abs(t.predict(std::vector<double>{1.0}) - (-(0.5 - 1.0) / h)) <= 1e-9);
}

TEST_CASE("gbt single leaf weight is -sum g / (sum h + lambda)") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 3 + rng.uniform_index(10);
    Matrix x(n, 1, std::vector<double>(n, 0.4));  // no split possible
    std::vector<int> y(n);
    double g = 0.0, h = 0.0;
    for (int& v : y) {
      v = static_cast<int>(rng.uniform_index(2));
      g += 0.5 - v;
      h += 0.25;
    }
    TreeParams p;
    p.n_trees = 1;
    p.lambda_reg = rng.uniform(0.0, 2.0);
    const TreeEnsemble m = fit_gbt(x, y, p);
    REQUIRE(m.trees()[0].leaf_count() == 1);
    CHECK(m.trees()[0].nodes[0].weight == doctest::Approx(-g / (h + p.lambda_reg)).epsilon(1e-12));
  }
}

TEST_CASE("gbt prediction is piecewise constant") {
  const Dataset& ds = synth_default();
  TreeParams p;
  p.n_trees = 20;
  const TreeEnsemble m = train_gbt(ds, p);
  Rng rng(8);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(ds.n_features());
    for (double& v : x) v = rng.uniform();
    std::vector<double> gap(x.size(), 1.0);
    for (const Tree& t : m.trees())
      for (const TreeNode& node : t.nodes)
        if (!node.is_leaf()) {
          const auto f = static_cast<std::size_t>(node.feature);
          gap[f] = std::min(gap[f], std::abs(x[f] - node.threshold));
        }
    std::vector<double> moved = x;
    for (std::size_t j = 0; j < x.size(); ++j) moved[j] += (rng.uniform() < 0.5 ? -0.49 : 0.49) * gap[j];
    CHECK(m.raw_score(moved) == m.raw_score(x));
  }
}

TEST_CASE("gbt growth modes respect max_leaves and differ in shape") {
  const Dataset& ds = synth_default();
  TreeParams level;
  level.n_trees = 5;
  level.max_leaves = 6;
  TreeParams leaf = level;
  leaf.growth = TreeGrowth::leaf_wise;
  const TreeEnsemble a = train_gbt(ds, level);
  const TreeEnsemble b = train_gbt(ds, leaf);
  for (const auto* m : {&a, &b})
    for (const Tree& t : m->trees()) {
      CHECK(t.leaf_count() <= 6);
      for (const TreeNode& node : t.nodes)
        if (!node.is_leaf()) CHECK(node.feature < static_cast<int>(ds.n_features()));
    }
  CHECK(test_accuracy(a, ds) >= 0.85);
  CHECK(test_accuracy(b, ds) >= 0.85);
  leaf.histogram_bins = 32;
  CHECK(test_accuracy(train_gbt(ds, leaf), ds) >= 0.85);
}

TEST_CASE("gbt configuration errors") {
  const Matrix x{{0.0}, {1.0}};
  const std::vector<int> y{0, 1};
  TreeParams p;
  p.n_trees = 0;
  CHECK_THROWS_AS((void)fit_gbt(x, y, p), ConfigError);
  p.n_trees = 1;
  p.max_leaves = 1;
  CHECK_THROWS_AS((void)fit_gbt(x, y, p), ConfigError);
}

TEST_CASE("knn nearest neighbour example") {
  const KnnModel m(Matrix{{0, 0}, {1, 1}}, {0, 1}, 1);
  const Matrix q{{0.1, 0.0}};
  CHECK(m.predict_proba(q) == std::vector<double>{0.0});
  CHECK(m.predict_label(q) == std::vector<int>{0});
  CHECK_THROWS_AS(KnnModel(Matrix{{0, 0}, {1, 1}}, {0, 1}, 2), ConfigError);
  CHECK_THROWS_AS(KnnModel(Matrix{{0, 0}, {1, 1}}, {0, 1}, 3), ConfigError);
}

TEST_CASE("knn matches a brute-force distance sort") {
  Rng rng(44);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 5 + rng.uniform_index(20), f = 1 + rng.uniform_index(4);
    Matrix x(n, f);
    // Coarse grid values so equal distances actually occur.
    for (double& v : x.values()) v = static_cast<double>(rng.uniform_index(4)) / 4.0;
    std::vector<int> y(n);
    for (int& v : y) v = static_cast<int>(rng.uniform_index(2));
    const std::size_t k = rep % 2 ? 3 : 1;
    const KnnModel m(x, y, k);
    Matrix q(3, f);
    for (double& v : q.values()) v = static_cast<double>(rng.uniform_index(4)) / 4.0;
    const auto proba = m.predict_proba(q);
    for (std::size_t r = 0; r < q.rows(); ++r) {
      std::vector<std::pair<double, std::size_t>> d;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < f; ++j) s += (q(r, j) - x(i, j)) * (q(r, j) - x(i, j));
        d.emplace_back(s, i);
      }
      std::sort(d.begin(), d.end());
      double votes = 0.0;
      for (std::size_t i = 0; i < k; ++i) votes += y[d[i].second];
      CHECK(proba[r] == doctest::Approx(votes / static_cast<double>(k)).epsilon(1e-15));
      if (k == 1) CHECK((proba[r] == 0.0 || proba[r] == 1.0));
    }
  }
}

TEST_CASE("margin model fixed parameters") {
  const MarginModel m({1.0, 0.0}, 0.0);
  CHECK(m.predict_label(Matrix{{2.0, 0.0}}) == std::vector<int>{1});
  const MarginModel zero({0.0, 0.0, 0.0}, 0.0);
  CHECK(zero.predict_proba(Matrix{{0.3, 0.9, 0.1}, {5, 5, 5}}) == std::vector<double>{0.5, 0.5});
  CHECK(zero.predict_label(Matrix{{0.3, 0.9, 0.1}}) == std::vector<int>{0});
}

TEST_CASE("margin model separates two 1-D points") {
  const MarginModel m = fit_margin(Matrix{{-1.0}, {1.0}}, std::vector<int>{0, 1}, MarginParams{100.0, 200, 0.01, 3});
  CHECK(m.weights()[0] > 0.0);
  CHECK(m.predict_label(Matrix{{-1.0}, {1.0}}) == std::vector<int>{0, 1});
  CHECK_THROWS_AS((void)fit_margin(Matrix{{-1.0}, {1.0}}, std::vector<int>{1, 1}, {}), TrainingError);
}

TEST_CASE("threshold rule") {
  CHECK(threshold_labels(std::vector<double>{0.51}) == std::vector<int>{1});
  CHECK(threshold_labels(std::vector<double>{0.5}) == std::vector<int>{0});
  CHECK(threshold_labels(std::vector<double>{0.2, 0.9}) == std::vector<int>{0, 1});
}

TEST_CASE("single-leaf zero-weight ensemble scores one half") {
  TreeEnsemble m(3, TreeParams{});
  m.add_tree(Tree{{TreeNode{}}});
  CHECK(m.predict_proba(Matrix{{0.1, 0.2, 0.3}}) == std::vector<double>{0.5});
}

TEST_CASE("every family: labels agree with thresholded scores, widths are checked") {
  const Dataset& ds = synth_default();
  BiRecurrentParams bp;
  bp.epochs = 1;
  bp.hidden_size = 8;
  bp.seed = 1;
  const BiRecurrentModel lstm = train_birecurrent(ds, bp);
  TreeParams tp;
  tp.n_trees = 10;
  const TreeEnsemble gbt = train_gbt(ds, tp);
  const KnnModel knn = train_knn(ds, 5);
  const MarginModel margin = train_margin(ds, MarginParams{});
  // Force an exact tie through the margin model at the decision boundary.
  const MarginModel tie({0.0, 0.0}, 0.0);
  CHECK(tie.predict_label(Matrix{{1.0, 1.0}}) == std::vector<int>{0});

  const Matrix x = ds.part_features(SplitPart::test);
  for (const Classifier* m : std::initializer_list<const Classifier*>{&lstm, &gbt, &knn, &margin}) {
    const auto p = m->predict_proba(x);
    const auto l = m->predict_label(x);
    for (std::size_t i = 0; i < p.size(); ++i) {
      CHECK(p[i] >= 0.0);
      CHECK(p[i] <= 1.0);
      CHECK(l[i] == (p[i] > 0.5 ? 1 : 0));
    }
    CHECK_THROWS_AS((void)m->predict_proba(Matrix(1, ds.n_features() + 1)), ShapeError);

    const auto back = classifier_from_json(m->to_json());
    CHECK(back->family() == m->family());
    CHECK(back->predict_proba(x) == p);
  }
  const std::vector<int> y = ds.part_labels(SplitPart::test);
  CHECK_THROWS_AS((void)gbt.input_gradient(x, y), NotDifferentiable);
  CHECK_THROWS_AS((void)knn.input_gradient(x, y), NotDifferentiable);
  CHECK_THROWS_AS((void)margin.input_gradient(x, y), NotDifferentiable);
  CHECK_NOTHROW((void)lstm.input_gradient(x, y));
}

TEST_CASE("model files carry provenance and reject hash mismatches") {
  const MarginModel m({0.5, -0.25}, 0.1, MarginParams{2.0, 10, 0.05, 9});
  const auto dir = test::scratch_dir("model_io");
  const ModelProvenance prov{"margin", "abc123", 9, "cfg1"};
  save_model(m, prov, dir / "m.json");
  const LoadedModel ok = load_model(dir / "m.json", "abc123");
  CHECK_FALSE(ok.hash_mismatch);
  CHECK(ok.provenance.seed == 9);
  CHECK(ok.model->to_json() == m.to_json());
  CHECK(ok.model->to_json()["hyperparameters"]["c"] == 2.0);
  CHECK_THROWS_AS((void)load_model(dir / "m.json", "zzz"), SchemaError);
  const LoadedModel forced = load_model(dir / "m.json", "zzz", true);
  CHECK(forced.hash_mismatch);
  CHECK(serialize_model(m, prov) == serialize_model(*ok.model, ok.provenance));
}

TEST_CASE("tree ensemble json rejects out-of-range nodes") {
  TreeEnsemble m(2, TreeParams{});
  m.add_tree(Tree{{TreeNode{0, 0.5, 1, 2, 0.0}, TreeNode{}, TreeNode{}}});
  auto j = m.to_json();
  CHECK_NOTHROW((void)TreeEnsemble::from_json(j));
  j["trees"][0][0]["feature"] = 7;
  CHECK_THROWS_AS((void)TreeEnsemble::from_json(j), SchemaError);
}
