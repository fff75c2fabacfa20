#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace advclaim {

// Non-owning row-major views. They let the layer code run GEMMs directly on
// slices of a flat parameter buffer without copying.
struct ConstMatrixView {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data + r * cols, cols}; }
  std::size_t size() const { return rows * cols; }
};

struct MatrixView {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  double& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) const { return {data + r * cols, cols}; }
  std::size_t size() const { return rows * cols; }
  operator ConstMatrixView() const { return {data, rows, cols}; }
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix row_vector(std::span<const double> values);
  static Matrix from_view(ConstMatrixView view);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  MatrixView view() noexcept { return {data_.data(), rows_, cols_}; }
  ConstMatrixView view() const noexcept { return {data_.data(), rows_, cols_}; }
  operator ConstMatrixView() const noexcept { return view(); }

  // Copies the listed rows, in order, into a new matrix.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::string shape_string(std::size_t rows, std::size_t cols);
std::string shape_string(ConstMatrixView m);

// Throws EvaluationError naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

// c = a * b (or c += a * b when accumulate is set).
void gemm_nn(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate = false);
// c = a^T * b
void gemm_tn(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate = false);
// c = a * b^T
void gemm_nt(ConstMatrixView a, ConstMatrixView b, MatrixView c, bool accumulate = false);

Matrix matmul(ConstMatrixView a, ConstMatrixView b);
Matrix transpose(ConstMatrixView a);

// result[i][j] = sum_k x[i][k] * w[k][j] + b[j]
Matrix affine(ConstMatrixView x, ConstMatrixView w, std::span<const double> b);

double max_abs_diff(ConstMatrixView a, ConstMatrixView b);

}  // namespace advclaim
