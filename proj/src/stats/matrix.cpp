#include "a2sbnn/stats/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "a2sbnn/errors.hpp"

namespace a2sbnn::stats {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("Matrix: value count does not match rows * cols");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::asymmetry() const {
  if (!square()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      const double a = (*this)(i, j);
      const double b = (*this)(j, i);
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      worst = std::max(worst, std::abs(a - b) / scale);
    }
  }
  return worst;
}

Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("multiply_transposed: inner dimension mismatch");
  Matrix out(a.rows(), b.rows());
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ai = &a.values()[i * k];
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* bj = &b.values()[j * k];
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += ai[t] * bj[t];
      out(i, j) = s;
    }
  }
  return out;
}

std::vector<double> multiply(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw ShapeError("multiply: dimension mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("max_abs_diff: shape mismatch");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  }
  return worst;
}

namespace {

// Plain row-oriented Cholesky-Banachiewicz; empty result when not SPD.
std::optional<Matrix> try_factor(const Matrix& c, double jitter) {
  const std::size_t n = c.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double* li = &l.values()[i * n];
    for (std::size_t j = 0; j <= i; ++j) {
      const double* lj = &l.values()[j * n];
      double s = c(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      if (i == j) {
        s += jitter;
        if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return l;
}

}  // namespace

CholeskyFactor cholesky_factor(const Matrix& c, double jitter) {
  if (!c.square()) throw ShapeError("cholesky: matrix must be square");
  if (c.asymmetry() > 1e-12) throw ShapeError("cholesky: matrix is not symmetric");
  if (!(jitter >= 0.0)) throw DomainError("cholesky: jitter must be non-negative");

  constexpr int kRetries = 3;
  double current = jitter;
  for (int attempt = 0; attempt <= kRetries; ++attempt) {
    if (auto l = try_factor(c, current)) return {std::move(*l), current};
    if (current == 0.0) {
      double mean_diag = 0.0;
      for (std::size_t i = 0; i < c.rows(); ++i) mean_diag += std::abs(c(i, i));
      mean_diag /= static_cast<double>(std::max<std::size_t>(c.rows(), 1));
      current = 1e-10 * std::max(mean_diag, 1.0);
    } else {
      current *= 10.0;
    }
  }
  throw NumericError("cholesky: matrix is not positive definite after jitter retries");
}

Matrix cholesky(const Matrix& c, double jitter) { return cholesky_factor(c, jitter).lower; }

}  // namespace a2sbnn::stats
