#include "advclaim/numkit/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "advclaim/errors.hpp"

namespace advclaim {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(rows, cols));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::row_vector(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::from_view(ConstMatrixView view) {
  return Matrix(view.rows, view.cols, std::vector<double>(view.data, view.data + view.size()));
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= rows_) throw ShapeError("row index out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

std::string shape_string(std::size_t rows, std::size_t cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

std::string shape_string(ConstMatrixView m) { return shape_string(m.rows, m.cols); }

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw EvaluationError(std::string("non-finite value in ") + what);
  }
}

namespace {

void prepare_output(MatrixView c, bool accumulate) {
  if (!accumulate) std::fill_n(c.data, c.size(), 0.0);
}

}  // namespace

void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) {
    throw ShapeError("gemm_nn shape mismatch: " + shape_string(a) + " * " + shape_string(b) + " -> " +
                     shape_string(c));
  }
  prepare_output(c, accumulate);
  const std::size_t n = b.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    double* out = c.data + i * n;
    const double* arow = a.data + i * a.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      const double* brow = b.data + k * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += s * brow[j];
    }
  }
}

void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate) {
  if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols) {
    throw ShapeError("gemm_tn shape mismatch: " + shape_string(a) + "^T * " + shape_string(b) + " -> " +
                     shape_string(c));
  }
  prepare_output(c, accumulate);
  const std::size_t n = b.cols;
  for (std::size_t r = 0; r < a.rows; ++r) {
    const double* arow = a.data + r * a.cols;
    const double* brow = b.data + r * n;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double s = arow[i];
      if (s == 0.0) continue;
      double* out = c.data + i * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += s * brow[j];
    }
  }
}

void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate) {
  if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows) {
    throw ShapeError("gemm_nt shape mismatch: " + shape_string(a) + " * " + shape_string(b) + "^T -> " +
                     shape_string(c));
  }
  prepare_output(c, accumulate);
  const std::size_t k_len = a.cols;
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data + i * k_len;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.data + j * k_len;
      double s = 0.0;
      for (std::size_t k = 0; k < k_len; ++k) s += arow[k] * brow[k];
      c.data[i * c.cols + j] += s;
    }
  }
}

Matrix matmul(ConstMatrixView a, ConstMatrixView b) {
  if (a.cols != b.rows) {
    throw ShapeError("matmul shape mismatch: " + shape_string(a) + " * " + shape_string(b));
  }
  Matrix c(a.rows, b.cols);
  gemm_nn(a, b, c.view());
  return c;
}

Matrix transpose(ConstMatrixView a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

Matrix affine(ConstMatrixView x, ConstMatrixView w, std::span<const double> b) {
  if (x.cols != w.rows || b.size() != w.cols) {
    throw ShapeError("affine shape mismatch: x " + shape_string(x) + ", w " + shape_string(w) + ", b [" +
                     std::to_string(b.size()) + "]");
  }
  Matrix out(x.rows, w.cols);
  for (std::size_t i = 0; i < x.rows; ++i) std::copy(b.begin(), b.end(), out.row(i).begin());
  gemm_nn(x, w, out.view(), true);
  require_finite(out.values(), "affine output");
  return out;
}

double max_abs_diff(ConstMatrixView a, ConstMatrixView b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeError("max_abs_diff shape mismatch: " + shape_string(a) + " vs " + shape_string(b));
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace advclaim
