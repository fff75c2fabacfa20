#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "advclaim/data/dataset.hpp"
#include "advclaim/numkit/matrix.hpp"
#include "advclaim/numkit/rng.hpp"

namespace advclaim::test {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

// Textbook triple loop, kept independent of the library's GEMM kernels.
inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

inline Matrix naive_transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

// Central differences on a subset of coordinates of a flat parameter vector.
inline std::vector<double> central_diff(const std::function<double()>& f, std::vector<double>& params,
                                        const std::vector<std::size_t>& coords, double h = 1e-5) {
  std::vector<double> out;
  for (std::size_t c : coords) {
    const double keep = params[c];
    params[c] = keep + h;
    const double up = f();
    params[c] = keep - h;
    const double down = f();
    params[c] = keep;
    out.push_back((up - down) / (2.0 * h));
  }
  return out;
}

inline double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double den = std::max(std::sqrt(na), std::sqrt(nb));
  return den == 0.0 ? 0.0 : std::sqrt(d) / den;
}

inline std::vector<std::size_t> sample_coords(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(static_cast<std::size_t>(rng.uniform_index(n)));
  return out;
}

// Hand-built dataset: every row is train unless listed in test.
inline Dataset make_dataset(Matrix x, std::vector<int> y, std::vector<std::size_t> test = {}) {
  Dataset ds;
  ds.features = std::move(x);
  ds.labels = std::move(y);
  for (std::size_t j = 0; j < ds.features.cols(); ++j) {
    FeatureMeta m;
    m.name = "x" + std::to_string(j);
    m.min = 0.0;
    m.max = 1.0;
    ds.meta.push_back(m);
  }
  std::vector<bool> is_test(ds.labels.size(), false);
  for (std::size_t i : test) is_test[i] = true;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) (is_test[i] ? ds.split.test : ds.split.train).push_back(i);
  return ds;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("advclaim-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace advclaim::test
