#include "drc/tensor.hpp"

#include <algorithm>
#include <unordered_set>

#include "drc/error.hpp"
#include "tensor_impl.hpp"

namespace drc {

using detail::Node;

std::string to_string(Shape s) {
  return "[" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
  if (shape.rows == 0 || shape.cols == 0) {
    throw DimensionError("tensor extents must be positive, got " + to_string(shape));
  }
  if (data.size() != shape.numel()) {
    throw DimensionError("tensor " + to_string(shape) + " needs " +
                         std::to_string(shape.numel()) + " values, got " +
                         std::to_string(data.size()));
  }
  node_ = std::make_shared<Node>();
  node_->shape = shape;
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(shape, 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
  return Tensor(shape, std::vector<double>(shape.numel(), value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1, 1}, {value}, requires_grad);
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows,
                         bool requires_grad) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged row list");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data), requires_grad);
}

Shape Tensor::shape() const { return node_ ? node_->shape : Shape{}; }

std::span<const double> Tensor::data() const {
  return node_ ? std::span<const double>(node_->data) : std::span<const double>();
}

double Tensor::operator()(std::size_t r, std::size_t c) const {
  return node_->data[r * node_->shape.cols + c];
}

std::span<const double> Tensor::row(std::size_t r) const {
  return data().subspan(r * node_->shape.cols, node_->shape.cols);
}

double Tensor::item() const {
  if (numel() != 1) throw DimensionError("item() on non-scalar " + to_string(shape()));
  return node_->data[0];
}

std::span<double> Tensor::mutable_data() {
  if (!node_->is_leaf()) throw ContractError("mutable_data() on a non-leaf tensor");
  return node_->data;
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_ && node_->is_leaf(); }
bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  return node_ ? std::span<const double>(node_->grad) : std::span<const double>();
}

void Tensor::zero_grad() {
  if (node_) node_->grad.clear();
}

Tensor Tensor::detach(bool requires_grad) const {
  return Tensor(node_->shape, node_->data, requires_grad);
}

void backward(const Tensor& root) {
  const auto& root_node = detail::Access::node(root);
  if (!root_node) throw ContractError("backward on an undefined tensor");
  if (root_node->shape.numel() != 1) {
    throw ContractError("backward needs a scalar root, got " + to_string(root_node->shape));
  }
  if (!root_node->requires_grad) return;

  // Post-order DFS gives a topological order; its reverse is the execution order reversed.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root_node.get(), 0}};
  seen.insert(root_node.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf() && n->consumed) {
      throw ContractError("backward called twice on the same graph");
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf()) n->grad.clear();
    n->grad_buffer();
  }
  root_node->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->is_leaf()) continue;
    n->backward(*n);
    n->consumed = true;
  }
}

}  // namespace drc
