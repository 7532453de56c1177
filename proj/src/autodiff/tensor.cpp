#include "a2sbnn/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "a2sbnn/errors.hpp"

namespace a2sbnn::ad {

std::string Shape::str() const {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {
  if (shape.rows == 0 || shape.cols == 0) throw ShapeError("Tensor: dimensions must be positive");
}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), data_(std::move(values)) {
  if (shape.rows == 0 || shape.cols == 0) throw ShapeError("Tensor: dimensions must be positive");
  if (data_.size() != shape.size()) {
    throw ShapeError("Tensor: " + std::to_string(data_.size()) + " values for shape " + shape.str());
  }
}

Tensor Tensor::column(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n, 1}, std::move(values));
}

double Tensor::item() const {
  if (shape_.rows != 1 || shape_.cols != 1) throw ShapeError("Tensor::item on shape " + shape_.str());
  return data_[0];
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

}  // namespace

Tensor matmul_kernel(const Tensor& a, const Tensor& b, bool transpose_a, bool transpose_b) {
  const std::size_t m = transpose_a ? a.cols() : a.rows();
  const std::size_t ka = transpose_a ? a.rows() : a.cols();
  const std::size_t kb = transpose_b ? b.cols() : b.rows();
  const std::size_t n = transpose_b ? b.rows() : b.cols();
  if (ka != kb) {
    throw ShapeError("matmul: inner dimensions differ, " + a.shape().str() +
                     (transpose_a ? "^T" : "") + " * " + b.shape().str() + (transpose_b ? "^T" : ""));
  }
  Tensor out({m, n});
  const ConstMap am(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                    static_cast<Eigen::Index>(a.cols()));
  const ConstMap bm(b.data().data(), static_cast<Eigen::Index>(b.rows()),
                    static_cast<Eigen::Index>(b.cols()));
  MutMap cm(out.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  if (!transpose_a && !transpose_b) {
    cm.noalias() = am * bm;
  } else if (!transpose_a && transpose_b) {
    cm.noalias() = am * bm.transpose();
  } else if (transpose_a && !transpose_b) {
    cm.noalias() = am.transpose() * bm;
  } else {
    cm.noalias() = am.transpose() * bm.transpose();
  }
  return out;
}

}  // namespace a2sbnn::ad
