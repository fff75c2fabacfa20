#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "advclaim/attribution/shapley.hpp"
#include "advclaim/errors.hpp"
#include "advclaim/numkit/rng.hpp"
#include "test_support.hpp"

using namespace advclaim;

namespace {

ScoreFn linear(std::vector<double> w, double b) {
  return [w = std::move(w), b](ConstMatrixView x) {
    std::vector<double> out(x.rows, b);
    for (std::size_t r = 0; r < x.rows; ++r)
      for (std::size_t c = 0; c < x.cols; ++c) out[r] += w[c] * x(r, c);
    return out;
  };
}

// Nonlinear and symmetric in its first two inputs.
double bumpy(double a, double b, double c) { return std::tanh(2.0 * a * b + c) + 0.3 * a * b * c; }

ScoreFn bumpy_fn() {
  return [](ConstMatrixView x) {
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = bumpy(x(r, 0), x(r, 1), x(r, 2));
    return out;
  };
}

}  // namespace

TEST_CASE("linear model with one background row matches the closed form") {
  const std::vector<double> w{0.8, -1.5, 0.3, 2.0};
  const Matrix mu{{0.2, 0.4, 0.6, 0.1}};
  const std::vector<double> x{0.9, 0.1, 0.5, 0.7};
  const auto res = mc_shapley(linear(w, 0.25), x, mu, 2000, 3);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double expected = w[j] * (x[j] - mu(0, j));
    CHECK(std::abs(res.per_feature[j].value - expected) <= 0.05 * std::abs(expected));
  }
  CHECK(res.n_permutations == 2000);
  CHECK(res.per_feature[0].name == "f0");
}

TEST_CASE("ignored feature gets no credit") {
  Rng rng(4);
  const Matrix bg = test::random_matrix(rng, 30, 3, 0.0, 1.0);
  const ScoreFn f = [](ConstMatrixView x) {
    std::vector<double> out(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) out[r] = 1.0 / (1.0 + std::exp(-(3 * x(r, 0) - 2 * x(r, 2))));
    return out;
  };
  for (int rep = 0; rep < 5; ++rep) {
    const std::vector<double> x{rng.uniform(), rng.uniform(), rng.uniform()};
    CHECK(std::abs(mc_shapley(f, x, bg, 300, static_cast<std::uint64_t>(rep)).per_feature[1].value) <= 0.01);
  }
}

TEST_CASE("efficiency within three standard errors") {
  Rng rng(6);
  const Matrix bg = test::random_matrix(rng, 50, 3, 0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const std::vector<double> x{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto res = mc_shapley(bumpy_fn(), x, bg, 500, static_cast<std::uint64_t>(rep));
    CHECK(res.score == doctest::Approx(bumpy(x[0], x[1], x[2])).epsilon(1e-14));
    CHECK(std::abs(res.sum() - (res.score - res.base_value)) <= 3.0 * res.sum_std_error + 1e-12);
  }
  const Matrix one{{0.3, 0.3, 0.3}};
  const auto exact = mc_shapley(bumpy_fn(), std::vector<double>{0.9, 0.2, 0.6}, one, 50, 1);
  CHECK(std::abs(exact.sum() - (exact.score - exact.base_value)) <= 1e-12);
}

TEST_CASE("duplicated columns receive equal attribution") {
  Rng rng(8);
  Matrix bg(50, 3);
  for (std::size_t r = 0; r < 50; ++r) {
    const double v = rng.uniform();
    bg(r, 0) = v;
    bg(r, 1) = v;
    bg(r, 2) = rng.uniform();
  }
  for (int rep = 0; rep < 5; ++rep) {
    const double v = rng.uniform();
    const std::vector<double> x{v, v, rng.uniform()};
    const auto res = mc_shapley(bumpy_fn(), x, bg, 1000, 100 + static_cast<std::uint64_t>(rep));
    const auto& a = res.per_feature[0];
    const auto& b = res.per_feature[1];
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    CHECK(std::abs(a.value - b.value) <= 2.0 * se + 1e-12);
  }
}

TEST_CASE("shapley errors and determinism") {
  const Matrix bg{{0.1, 0.2}};
  CHECK_THROWS_AS((void)mc_shapley(linear({1, 1}, 0), std::vector<double>{1, 2, 3}, bg, 10, 1), ShapeError);
  CHECK_THROWS_AS((void)mc_shapley(linear({1, 1}, 0), std::vector<double>{1, 2}, Matrix(0, 2), 10, 1), ConfigError);
  CHECK_THROWS_AS((void)mc_shapley(linear({1, 1}, 0), std::vector<double>{1, 2}, bg, 0, 1), ConfigError);
  Rng rng(1);
  const Matrix big = test::random_matrix(rng, 20, 3, 0.0, 1.0);
  const auto a = mc_shapley(bumpy_fn(), std::vector<double>{0.4, 0.5, 0.6}, big, 100, 9);
  const auto b = mc_shapley(bumpy_fn(), std::vector<double>{0.4, 0.5, 0.6}, big, 100, 9);
  for (std::size_t j = 0; j < 3; ++j) CHECK(a.per_feature[j].value == b.per_feature[j].value);
}

TEST_CASE("one informative feature ranks first") {
  Rng rng(12);
  const std::size_t n = 200;
  Matrix x(n, 5);
  std::vector<int> y(n);
  std::vector<std::size_t> test_rows;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    x(i, 0) = y[i] ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.4);
    for (std::size_t j = 1; j < 5; ++j) x(i, j) = rng.uniform();
    if (i % 5 == 0) test_rows.push_back(i);
  }
  const Dataset ds = test::make_dataset(x, y, test_rows);
  // A score that looks at feature 0 strongly and the noise columns weakly.
  const ScoreFn f = [](ConstMatrixView m) {
    std::vector<double> out(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r)
      out[r] = 1.0 / (1.0 + std::exp(-(8.0 * (m(r, 0) - 0.5) + 0.2 * m(r, 3) - 0.1 * m(r, 4))));
    return out;
  };
  const auto ranking = global_importance(f, ds, 20, 100, 5);
  REQUIRE(ranking.size() == 5);
  CHECK(ranking[0].feature == "x0");
  CHECK(ranking[0].rank == 1);
  for (std::size_t i = 1; i < ranking.size(); ++i) {
    CHECK(ranking[i].mean_abs_shapley <= ranking[i - 1].mean_abs_shapley);
    CHECK(ranking[i].rank == i + 1);
  }
  CHECK_THROWS_AS((void)global_importance(f, ds, 41, 10, 5), ConfigError);

  const std::string csv = importance_csv(ranking, 2);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "feature,mean_abs_shapley,rank");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("constant model has no important features") {
  Rng rng(2);
  const Matrix x = test::random_matrix(rng, 40, 3, 0.0, 1.0);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) y[i] = static_cast<int>(i % 2);
  const Dataset ds = test::make_dataset(x, y, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  const auto ranking = global_importance(linear({0, 0, 0}, 0.4), ds, 10, 50, 1);
  for (const auto& e : ranking) CHECK(e.mean_abs_shapley <= 1e-12);
}
