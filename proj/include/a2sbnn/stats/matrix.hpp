#pragma once

#include <cstddef>
#include <vector>

namespace a2sbnn::stats {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Max |a_ij - a_ji| scaled by max(1, |a_ij|); infinity for non-square.
  double asymmetry() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// A * B^T (used for L * L^T reconstruction checks).
Matrix multiply_transposed(const Matrix& a, const Matrix& b);

// y = A x
std::vector<double> multiply(const Matrix& a, const std::vector<double>& x);

// Max-abs entrywise difference; ShapeError on mismatch.
double max_abs_diff(const Matrix& a, const Matrix& b);

struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;  // diagonal shift that was actually applied
};

// Lower-triangular L with L L^T = c + jitter I. On failure the jitter is
// multiplied by 10 (seeded from a tiny diagonal-relative value when zero)
// and the factorization retried up to three times.
// Throws ShapeError for non-square or asymmetric (> 1e-12) input and
// NumericError when no attempt yields a positive definite matrix.
CholeskyFactor cholesky_factor(const Matrix& c, double jitter);

// Convenience wrapper returning only the factor.
Matrix cholesky(const Matrix& c, double jitter);

}  // namespace a2sbnn::stats
