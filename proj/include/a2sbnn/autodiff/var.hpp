#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "a2sbnn/autodiff/tensor.hpp"

namespace a2sbnn::ad {

class Var;
struct Node;

// Given the node's own output and the gradient flowing into it, returns one
// gradient per input (an undefined Var when that input receives none).
// Pullbacks are written with the differentiable ops in ops.hpp, so running
// them while gradient recording is on yields a differentiable gradient graph.
using Pullback = std::function<std::vector<Var>(const Var& out, const Var& grad)>;

struct Node {
  Tensor value;
  std::vector<Var> inputs;
  // requires_grad of each input when the op was recorded.
  std::vector<bool> input_tracked;
  Pullback pullback;
  bool requires_grad = false;
  std::optional<Tensor> grad;  // accumulated by backward() on leaves
  const char* op = "leaf";
};

// Handle to a node of a dynamically recorded computation graph. Copies share
// the node.
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  static Var constant(Tensor value) { return Var(std::move(value), false); }
  static Var parameter(Tensor value) { return Var(std::move(value), true); }

  bool defined() const { return static_cast<bool>(node_); }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  double item() const { return node_->value.item(); }

  // In-place access for optimizers; only valid on leaves.
  Tensor& mutable_value();

  bool requires_grad() const { return node_ && node_->requires_grad; }
  bool is_leaf() const { return node_ && node_->inputs.empty(); }
  const char* op() const { return node_->op; }

  // Leaves only.
  void set_requires_grad(bool on);

  bool has_grad() const { return node_ && node_->grad.has_value(); }
  // Accumulated gradient; zeros of the right shape when none was recorded.
  Tensor grad() const;
  void zero_grad();

  const Node* node() const { return node_.get(); }

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  std::shared_ptr<Node> node_;

  friend Var make_op(const char* op, Tensor value, std::vector<Var> inputs, Pullback pullback);
  friend class GraphWalker;
};

// Records an operation. When recording is disabled or no input requires a
// gradient the result is a constant with no history.
Var make_op(const char* op, Tensor value, std::vector<Var> inputs, Pullback pullback);

bool grad_enabled();

// Disables graph recording for its lifetime (thread-local).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Temporarily toggles requires_grad on a set of leaves (e.g. to freeze a
// network while differentiating through it).
class RequiresGradScope {
 public:
  RequiresGradScope(std::vector<Var> leaves, bool on);
  ~RequiresGradScope();
  RequiresGradScope(const RequiresGradScope&) = delete;
  RequiresGradScope& operator=(const RequiresGradScope&) = delete;

 private:
  std::vector<Var> leaves_;
  std::vector<bool> previous_;
};

// Reverse-mode pass from a 1x1 loss; gradients are added to the .grad of
// every reachable leaf that requires one. ShapeError for non-scalar loss.
void backward(const Var& loss);

// Gradients of a scalar output with respect to `inputs`, returned as graph
// nodes. With create_graph the returned gradients are themselves
// differentiable (double backward). GraphError when an input is not part of
// the output's graph.
std::vector<Var> grad(const Var& output, const std::vector<Var>& inputs,
                      bool create_graph = false);

}  // namespace a2sbnn::ad
