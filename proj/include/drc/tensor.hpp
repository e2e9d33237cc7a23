#pragma once

// Dense row-major matrices of doubles with reverse-mode differentiation.
//
// Every tensor is two-dimensional; scalars are 1×1 and vectors are 1×n or n×1.
// Operations record their inputs when any input requires a gradient, forming a
// graph that `backward` walks once in reverse execution order. Calling
// `backward` a second time through the same interior nodes is a ContractError;
// leaf gradients accumulate until `zero_grad`.

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace drc {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t numel() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

std::string to_string(Shape s);

namespace detail {
struct Node;
struct Access;
}

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows,
                          bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  Shape shape() const;
  std::size_t rows() const { return shape().rows; }
  std::size_t cols() const { return shape().cols; }
  std::size_t numel() const { return shape().numel(); }

  std::span<const double> data() const;
  double operator()(std::size_t r, std::size_t c) const;
  std::span<const double> row(std::size_t r) const;
  /// Value of a 1×1 tensor.
  double item() const;

  /// In-place access for leaves only (optimizer updates, test perturbation).
  std::span<double> mutable_data();

  bool requires_grad() const;
  bool is_leaf() const;
  bool has_grad() const;
  /// Empty span until a backward pass has reached this tensor.
  std::span<const double> grad() const;
  void zero_grad();

  /// A new leaf holding a copy of the values, disconnected from any graph.
  Tensor detach(bool requires_grad = false) const;

  /// Identity of the underlying storage.
  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct detail::Access;
};

/// Populates ∂root/∂t for every requires_grad tensor reachable from `root`.
/// `root` must be 1×1.
void backward(const Tensor& root);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise (Hadamard) product.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor mul_scalar(const Tensor& a, double s);
/// x[N×D] + b[1×D] added to every row.
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor square(const Tensor& a);
Tensor sum_all(const Tensor& a);
/// N×K → N×1, each row summed.
Tensor sum_rows(const Tensor& a);
/// N×K → 1×K, each column summed.
Tensor sum_cols(const Tensor& a);
Tensor transpose(const Tensor& a);
/// Square N×N → N×1.
Tensor diagonal(const Tensor& a);
Tensor l2_normalize_rows(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor log_softmax_rows(const Tensor& a);

}  // namespace drc
