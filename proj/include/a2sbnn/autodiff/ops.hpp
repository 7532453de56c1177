#pragma once

#include <vector>

#include "a2sbnn/autodiff/var.hpp"

namespace a2sbnn::ad {

// Elementwise binary ops. Operands must have equal shapes, or one of them
// may be 1xC (broadcast over rows) or 1x1 (broadcast everywhere). Any other
// combination is a ShapeError.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);

Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);

// op(a) * op(b) with optional transposes.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);
Var transpose(const Var& a);

// Sum of all entries -> 1x1.
Var sum(const Var& a);
Var mean(const Var& a);
// Reduce rows -> 1xC.
Var sum_rows(const Var& a);
Var mean_rows(const Var& a);
// Reduce columns -> Rx1.
Var sum_cols(const Var& a);

// Expand a 1x1 or 1xC tensor to `shape`; the adjoint of sum_to.
Var broadcast_to(const Var& a, Shape shape);
// Sum a tensor down to 1x1, 1xC or Rx1 `shape`; the adjoint of broadcast_to.
Var sum_to(const Var& a, Shape shape);

Var sqrt(const Var& a);
Var square(const Var& a);
Var exp(const Var& a);
Var abs(const Var& a);
Var sigmoid(const Var& a);
Var elu(const Var& a, double alpha = 1.0);
// Derivative of elu, itself differentiable.
Var elu_grad(const Var& a, double alpha = 1.0);
Var leaky_relu(const Var& a, double slope);

// axis 0 stacks rows, axis 1 stacks columns.
Var concat(const std::vector<Var>& parts, int axis);
// Half-open range [begin, end) along `axis`.
Var slice(const Var& a, int axis, std::size_t begin, std::size_t end);
// Embeds `a` at offset `begin` along `axis` in a zero tensor of extent `total`.
Var pad(const Var& a, int axis, std::size_t begin, std::size_t total);

// L2 norm of every entry -> 1x1, sqrt(sum(a^2) + eps).
Var norm2(const Var& a, double eps = 0.0);
// Per-row L2 norm -> Rx1, sqrt(sum_cols(a^2) + eps).
Var norm2_rows(const Var& a, double eps = 0.0);

// Same value, no history.
Var detach(const Var& a);

}  // namespace a2sbnn::ad
