#include "a2sbnn/autodiff/ops.hpp"

#include <cmath>
#include <string>

#include "a2sbnn/errors.hpp"

namespace a2sbnn::ad {
namespace {

template <typename F>
Tensor map(const Tensor& a, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

bool broadcastable_from(const Shape& small, const Shape& big) {
  if (small == big) return true;
  if (small == Shape{1, 1}) return true;
  return small.rows == 1 && small.cols == big.cols;
}

// Brings both operands to a common shape through broadcast_to nodes.
std::pair<Var, Var> align(const Var& a, const Var& b, const char* op) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa == sb) return {a, b};
  if (broadcastable_from(sa, sb)) return {broadcast_to(a, sb), b};
  if (broadcastable_from(sb, sa)) return {a, broadcast_to(b, sa)};
  throw ShapeError(std::string(op) + ": cannot broadcast " + sa.str() + " with " + sb.str());
}

std::string provenance(const Var& v) {
  return std::string("input from op '") + v.op() + "' with shape " + v.shape().str();
}

}  // namespace

Var add(const Var& a0, const Var& b0) {
  auto [a, b] = align(a0, b0, "add");
  return make_op("add", zip(a.value(), b.value(), [](double x, double y) { return x + y; }), {a, b},
                 [](const Var&, const Var& g) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a0, const Var& b0) {
  auto [a, b] = align(a0, b0, "sub");
  return make_op("sub", zip(a.value(), b.value(), [](double x, double y) { return x - y; }), {a, b},
                 [](const Var&, const Var& g) { return std::vector<Var>{g, neg(g)}; });
}

Var mul(const Var& a0, const Var& b0) {
  auto [a, b] = align(a0, b0, "mul");
  return make_op("mul", zip(a.value(), b.value(), [](double x, double y) { return x * y; }), {a, b},
                 [a, b](const Var&, const Var& g) {
                   return std::vector<Var>{a.requires_grad() ? mul(g, b) : Var(),
                                           b.requires_grad() ? mul(g, a) : Var()};
                 });
}

Var div(const Var& a0, const Var& b0) {
  auto [a, b] = align(a0, b0, "div");
  for (double v : b.value().data()) {
    if (v == 0.0) throw NumericError("div: division by zero, denominator " + provenance(b));
  }
  return make_op("div", zip(a.value(), b.value(), [](double x, double y) { return x / y; }), {a, b},
                 [b](const Var& out, const Var& g) {
                   return std::vector<Var>{div(g, b), b.requires_grad() ? neg(div(mul(g, out), b)) : Var()};
                 });
}

Var neg(const Var& a) {
  return make_op("neg", map(a.value(), [](double x) { return -x; }), {a},
                 [](const Var&, const Var& g) { return std::vector<Var>{neg(g)}; });
}

Var scale(const Var& a, double c) {
  return make_op("scale", map(a.value(), [c](double x) { return c * x; }), {a},
                 [c](const Var&, const Var& g) { return std::vector<Var>{scale(g, c)}; });
}

Var add_scalar(const Var& a, double c) {
  return make_op("add_scalar", map(a.value(), [c](double x) { return x + c; }), {a},
                 [](const Var&, const Var& g) { return std::vector<Var>{g}; });
}

Var matmul(const Var& a, const Var& b, bool ta, bool tb) {
  Tensor value = matmul_kernel(a.value(), b.value(), ta, tb);
  return make_op("matmul", std::move(value), {a, b}, [a, b, ta, tb](const Var&, const Var& g) {
    Var ga;
    Var gb;
    const bool need_a = a.requires_grad();
    const bool need_b = b.requires_grad();
    if (!ta && !tb) {
      if (need_a) ga = matmul(g, b, false, true);
      if (need_b) gb = matmul(a, g, true, false);
    } else if (!ta && tb) {
      if (need_a) ga = matmul(g, b, false, false);
      if (need_b) gb = matmul(g, a, true, false);
    } else if (ta && !tb) {
      if (need_a) ga = matmul(b, g, false, true);
      if (need_b) gb = matmul(a, g, false, false);
    } else {
      if (need_a) ga = matmul(b, g, true, true);
      if (need_b) gb = matmul(g, a, true, true);
    }
    return std::vector<Var>{ga, gb};
  });
}

Var transpose(const Var& a) {
  const Tensor& v = a.value();
  Tensor out({v.cols(), v.rows()});
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) out(c, r) = v(r, c);
  }
  return make_op("transpose", std::move(out), {a},
                 [](const Var&, const Var& g) { return std::vector<Var>{transpose(g)}; });
}

Var sum(const Var& a) { return sum_to(a, Shape{1, 1}); }

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

Var sum_rows(const Var& a) { return sum_to(a, Shape{1, a.shape().cols}); }

Var mean_rows(const Var& a) {
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.shape().rows));
}

Var sum_cols(const Var& a) { return sum_to(a, Shape{a.shape().rows, 1}); }

Var broadcast_to(const Var& a, Shape shape) {
  const Shape& from = a.shape();
  if (from == shape) return a;
  if (!broadcastable_from(from, shape)) {
    throw ShapeError("broadcast_to: cannot broadcast " + from.str() + " to " + shape.str());
  }
  Tensor out(shape);
  const Tensor& v = a.value();
  for (std::size_t r = 0; r < shape.rows; ++r) {
    for (std::size_t c = 0; c < shape.cols; ++c) out(r, c) = from.cols == 1 ? v[0] : v(0, c);
  }
  return make_op("broadcast_to", std::move(out), {a}, [from](const Var&, const Var& g) {
    return std::vector<Var>{sum_to(g, from)};
  });
}

Var sum_to(const Var& a, Shape shape) {
  const Shape from = a.shape();
  if (from == shape) return a;
  const Tensor& v = a.value();
  Tensor out(shape, 0.0);
  if (shape == Shape{1, 1}) {
    double s = 0.0;
    for (double x : v.data()) s += x;
    out[0] = s;
  } else if (shape.rows == 1 && shape.cols == from.cols) {
    for (std::size_t r = 0; r < from.rows; ++r) {
      for (std::size_t c = 0; c < from.cols; ++c) out[c] += v(r, c);
    }
  } else if (shape.cols == 1 && shape.rows == from.rows) {
    for (std::size_t r = 0; r < from.rows; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < from.cols; ++c) s += v(r, c);
      out[r] = s;
    }
  } else {
    throw ShapeError("sum_to: cannot reduce " + from.str() + " to " + shape.str());
  }
  return make_op("sum_to", std::move(out), {a}, [from, shape](const Var&, const Var& g) {
    if (shape.cols == 1 && shape.rows == from.rows && shape.rows != 1) {
      // Row sums: expand each row value across the columns.
      return std::vector<Var>{matmul(g, Var::constant(Tensor({1, from.cols}, 1.0)))};
    }
    return std::vector<Var>{broadcast_to(g, from)};
  });
}

Var sqrt(const Var& a) {
  for (double x : a.value().data()) {
    if (!(x >= 0.0)) throw NumericError("sqrt: negative or NaN argument, " + provenance(a));
  }
  return make_op("sqrt", map(a.value(), [](double x) { return std::sqrt(x); }), {a},
                 [](const Var& out, const Var& g) { return std::vector<Var>{div(scale(g, 0.5), out)}; });
}

Var square(const Var& a) {
  return make_op("square", map(a.value(), [](double x) { return x * x; }), {a},
                 [a](const Var&, const Var& g) { return std::vector<Var>{mul(g, scale(a, 2.0))}; });
}

Var exp(const Var& a) {
  return make_op("exp", map(a.value(), [](double x) { return std::exp(x); }), {a},
                 [](const Var& out, const Var& g) { return std::vector<Var>{mul(g, out)}; });
}

Var abs(const Var& a) {
  Tensor sign = map(a.value(), [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
  return make_op("abs", map(a.value(), [](double x) { return std::abs(x); }), {a},
                 [sign = std::move(sign)](const Var&, const Var& g) {
                   return std::vector<Var>{mul(g, Var::constant(sign))};
                 });
}

Var sigmoid(const Var& a) {
  Tensor out = map(a.value(), [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return make_op("sigmoid", std::move(out), {a}, [](const Var& out, const Var& g) {
    return std::vector<Var>{mul(g, sub(out, square(out)))};
  });
}

Var elu(const Var& a, double alpha) {
  for (double x : a.value().data()) {
    if (!std::isfinite(x)) throw NumericError("elu: non-finite argument, " + provenance(a));
  }
  Tensor out = map(a.value(), [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); });
  return make_op("elu", std::move(out), {a}, [a, alpha](const Var&, const Var& g) {
    return std::vector<Var>{mul(g, elu_grad(a, alpha))};
  });
}

Var elu_grad(const Var& a, double alpha) {
  Tensor out = map(a.value(), [alpha](double x) { return x > 0.0 ? 1.0 : alpha * std::exp(x); });
  Tensor negative_mask = map(a.value(), [](double x) { return x > 0.0 ? 0.0 : 1.0; });
  return make_op("elu_grad", std::move(out), {a},
                 [mask = std::move(negative_mask)](const Var& out, const Var& g) {
                   return std::vector<Var>{mul(g, mul(out, Var::constant(mask)))};
                 });
}

Var leaky_relu(const Var& a, double slope) {
  Tensor factor = map(a.value(), [slope](double x) { return x > 0.0 ? 1.0 : slope; });
  Tensor out = zip(a.value(), factor, [](double x, double f) { return x * f; });
  return make_op("leaky_relu", std::move(out), {a},
                 [factor = std::move(factor)](const Var&, const Var& g) {
                   return std::vector<Var>{mul(g, Var::constant(factor))};
                 });
}

Var concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  if (axis != 0 && axis != 1) throw ShapeError("concat: axis must be 0 or 1");
  const Shape first = parts.front().shape();
  std::size_t total = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (axis == 1 ? s.rows != first.rows : s.cols != first.cols) {
      throw ShapeError("concat: incompatible shapes " + first.str() + " and " + s.str());
    }
    total += axis == 1 ? s.cols : s.rows;
  }
  const Shape shape = axis == 1 ? Shape{first.rows, total} : Shape{total, first.cols};
  Tensor out(shape);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < v.rows(); ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) {
        if (axis == 1) {
          out(r, offset + c) = v(r, c);
        } else {
          out(offset + r, c) = v(r, c);
        }
      }
    }
    offset += axis == 1 ? v.cols() : v.rows();
  }
  std::vector<std::size_t> extents;
  for (const auto& p : parts) extents.push_back(axis == 1 ? p.shape().cols : p.shape().rows);
  return make_op("concat", std::move(out), parts,
                 [axis, offsets, extents](const Var&, const Var& g) {
                   std::vector<Var> grads;
                   for (std::size_t i = 0; i < offsets.size(); ++i) {
                     grads.push_back(slice(g, axis, offsets[i], offsets[i] + extents[i]));
                   }
                   return grads;
                 });
}

Var slice(const Var& a, int axis, std::size_t begin, std::size_t end) {
  if (axis != 0 && axis != 1) throw ShapeError("slice: axis must be 0 or 1");
  const Shape& s = a.shape();
  const std::size_t extent = axis == 1 ? s.cols : s.rows;
  if (begin >= end || end > extent) throw ShapeError("slice: range out of bounds for " + s.str());
  if (begin == 0 && end == extent) return a;
  const Shape shape = axis == 1 ? Shape{s.rows, end - begin} : Shape{end - begin, s.cols};
  Tensor out(shape);
  const Tensor& v = a.value();
  for (std::size_t r = 0; r < shape.rows; ++r) {
    for (std::size_t c = 0; c < shape.cols; ++c) {
      out(r, c) = axis == 1 ? v(r, begin + c) : v(begin + r, c);
    }
  }
  return make_op("slice", std::move(out), {a}, [axis, begin, extent](const Var&, const Var& g) {
    return std::vector<Var>{pad(g, axis, begin, extent)};
  });
}

Var pad(const Var& a, int axis, std::size_t begin, std::size_t total) {
  if (axis != 0 && axis != 1) throw ShapeError("pad: axis must be 0 or 1");
  const Shape& s = a.shape();
  const std::size_t len = axis == 1 ? s.cols : s.rows;
  if (begin + len > total) throw ShapeError("pad: target extent too small");
  if (begin == 0 && len == total) return a;
  const Shape shape = axis == 1 ? Shape{s.rows, total} : Shape{total, s.cols};
  Tensor out(shape, 0.0);
  const Tensor& v = a.value();
  for (std::size_t r = 0; r < s.rows; ++r) {
    for (std::size_t c = 0; c < s.cols; ++c) {
      if (axis == 1) {
        out(r, begin + c) = v(r, c);
      } else {
        out(begin + r, c) = v(r, c);
      }
    }
  }
  return make_op("pad", std::move(out), {a}, [axis, begin, len](const Var&, const Var& g) {
    return std::vector<Var>{slice(g, axis, begin, begin + len)};
  });
}

Var norm2(const Var& a, double eps) { return sqrt(add_scalar(sum(square(a)), eps)); }

Var norm2_rows(const Var& a, double eps) { return sqrt(add_scalar(sum_cols(square(a)), eps)); }

Var detach(const Var& a) { return Var::constant(a.value()); }

}  // namespace a2sbnn::ad
