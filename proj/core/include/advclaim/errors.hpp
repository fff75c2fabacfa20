#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace advclaim {

// Root of every error raised by the library. Callers that only need to
// distinguish "ours" from everything else can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// A scalar function returned a non-finite value, or an operation produced one.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

class IngestionError : public Error {
 public:
  IngestionError(const std::string& what, std::size_t row)
      : Error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  explicit IngestionError(const std::string& what) : Error(what) {}

  // 1-based data row (header excluded), 0 when the error is not row-specific.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Raised by gradient queries on model families without an input gradient.
class NotDifferentiable : public Error {
 public:
  explicit NotDifferentiable(const std::string& family)
      : Error("model family '" + family + "' is not differentiable"),
        family_(family) {}

  const std::string& family() const noexcept { return family_; }

 private:
  std::string family_;
};

class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace advclaim
