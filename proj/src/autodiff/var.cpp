#include "a2sbnn/autodiff/var.hpp"

#include <string>
#include <unordered_map>
#include <unordered_set>

#include "a2sbnn/autodiff/ops.hpp"
#include "a2sbnn/errors.hpp"

namespace a2sbnn::ad {
namespace {

thread_local bool g_grad_enabled = true;

void accumulate(Tensor& into, const Tensor& g) {
  if (into.shape() != g.shape()) throw ShapeError("gradient shape mismatch during accumulation");
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += g[i];
}

}  // namespace

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Tensor& Var::mutable_value() {
  if (!is_leaf()) throw GraphError("mutable_value on a non-leaf node");
  return node_->value;
}

void Var::set_requires_grad(bool on) {
  if (!is_leaf()) throw GraphError("set_requires_grad on a non-leaf node");
  node_->requires_grad = on;
}

Tensor Var::grad() const {
  if (node_->grad) return *node_->grad;
  return Tensor(shape(), 0.0);
}

void Var::zero_grad() {
  if (node_) node_->grad.reset();
}

Var make_op(const char* op, Tensor value, std::vector<Var> inputs, Pullback pullback) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->op = op;
  bool needs = false;
  if (g_grad_enabled) {
    for (const auto& in : inputs) needs = needs || in.requires_grad();
  }
  if (needs) {
    node->input_tracked.reserve(inputs.size());
    for (const auto& in : inputs) node->input_tracked.push_back(in.requires_grad());
    node->inputs = std::move(inputs);
    node->pullback = std::move(pullback);
    node->requires_grad = true;
  }
  return Var(std::move(node));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

RequiresGradScope::RequiresGradScope(std::vector<Var> leaves, bool on) : leaves_(std::move(leaves)) {
  previous_.reserve(leaves_.size());
  for (auto& v : leaves_) {
    previous_.push_back(v.requires_grad());
    v.set_requires_grad(on);
  }
}

RequiresGradScope::~RequiresGradScope() {
  for (std::size_t i = 0; i < leaves_.size(); ++i) leaves_[i].set_requires_grad(previous_[i]);
}

class GraphWalker {
 public:
  // Reverse topological propagation from `output`. Returns the gradient of
  // every visited node keyed by node address.
  static std::unordered_map<const Node*, Var> run(const Var& output, bool create_graph,
                                                  bool accumulate_leaves) {
    if (output.shape() != Shape{1, 1}) {
      throw ShapeError("backward: output must be scalar, got " + output.shape().str());
    }
    std::unordered_map<const Node*, Var> grads;
    if (!output.requires_grad()) return grads;

    const std::vector<std::shared_ptr<Node>> order = topo_order(output.node_);

    bool previous = g_grad_enabled;
    g_grad_enabled = create_graph;
    try {
      grads.emplace(output.node_.get(), Var(Tensor::scalar(1.0)));
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::shared_ptr<Node>& node = *it;
        auto found = grads.find(node.get());
        if (found == grads.end()) continue;
        const Var g = found->second;
        if (node->inputs.empty()) {
          if (accumulate_leaves) {
            if (!node->grad) node->grad = Tensor(node->value.shape(), 0.0);
            accumulate(*node->grad, g.value());
          }
          continue;
        }
        const std::vector<Var> input_grads = node->pullback(Var(node), g);
        for (std::size_t i = 0; i < node->inputs.size(); ++i) {
          const Var& in = node->inputs[i];
          if (!node->input_tracked[i] || i >= input_grads.size() || !input_grads[i].defined()) continue;
          if (input_grads[i].shape() != in.shape()) {
            throw ShapeError(std::string("pullback of '") + node->op + "' produced gradient " +
                             input_grads[i].shape().str() + " for input " + in.shape().str());
          }
          auto [slot, inserted] = grads.try_emplace(in.node_.get(), input_grads[i]);
          if (!inserted) slot->second = add(slot->second, input_grads[i]);
        }
      }
    } catch (...) {
      g_grad_enabled = previous;
      throw;
    }
    g_grad_enabled = previous;
    return grads;
  }

  static const Node* key(const Var& v) { return v.node_.get(); }

 private:
  static std::vector<std::shared_ptr<Node>> topo_order(const std::shared_ptr<Node>& root) {
    std::vector<std::shared_ptr<Node>> order;
    std::unordered_set<const Node*> visited;
    // Iterative post-order DFS: (node, next input index).
    std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root.get());
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < node->inputs.size()) {
        const std::size_t i = next++;
        const Var& in = node->inputs[i];
        if (node->input_tracked[i] && visited.insert(in.node_.get()).second) {
          stack.emplace_back(in.node_, 0);
        }
      } else {
        order.push_back(node);
        stack.pop_back();
      }
    }
    return order;
  }
};

void backward(const Var& loss) {
  if (!loss.defined()) throw GraphError("backward on an undefined Var");
  GraphWalker::run(loss, /*create_graph=*/false, /*accumulate_leaves=*/true);
}

std::vector<Var> grad(const Var& output, const std::vector<Var>& inputs, bool create_graph) {
  if (!output.defined()) throw GraphError("grad on an undefined Var");
  auto grads = GraphWalker::run(output, create_graph, /*accumulate_leaves=*/false);
  std::vector<Var> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    auto it = grads.find(GraphWalker::key(x));
    if (it == grads.end()) {
      throw GraphError("grad: input is not part of the output's graph");
    }
    out.push_back(it->second);
  }
  return out;
}

}  // namespace a2sbnn::ad
