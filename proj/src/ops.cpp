#include <algorithm>
#include <cmath>

#include "drc/error.hpp"
#include "drc/kernels.hpp"
#include "drc/tensor.hpp"
#include "tensor_impl.hpp"

namespace drc {

using detail::Access;
using detail::Node;
using NodePtr = std::shared_ptr<Node>;

namespace {

const NodePtr& node_of(const Tensor& t, const char* op) {
  const NodePtr& n = Access::node(t);
  if (!n) throw ContractError(std::string(op) + ": undefined tensor operand");
  return n;
}

// Builds the result node; the backward closure is attached only when some input needs a gradient.
template <typename Backward>
Tensor make_result(Shape shape, std::vector<double> data, std::vector<NodePtr> inputs,
                   Backward&& bw) {
  auto out = std::make_shared<Node>();
  out->shape = shape;
  out->data = std::move(data);
  const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                 [](const NodePtr& n) { return n->requires_grad; });
  if (needs) {
    out->requires_grad = true;
    out->inputs = std::move(inputs);
    out->backward = std::forward<Backward>(bw);
  }
  return Access::wrap(std::move(out));
}

void require_same_shape(const Node& a, const Node& b, const char* op) {
  if (a.shape != b.shape) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape) + " vs " +
                         to_string(b.shape));
  }
}

const kernels::KernelTable& K() { return kernels::active(); }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "matmul");
  const NodePtr& bn = node_of(b, "matmul");
  if (an->shape.cols != bn->shape.rows) {
    throw DimensionError("matmul: inner extents differ, " + to_string(an->shape) + " · " +
                         to_string(bn->shape));
  }
  const std::size_t m = an->shape.rows, k = an->shape.cols, n = bn->shape.cols;
  std::vector<double> out(m * n, 0.0);
  K().gemm_nn(an->data.data(), bn->data.data(), out.data(), m, k, n);
  return make_result({m, n}, std::move(out), {an, bn}, [m, k, n](Node& self) {
    Node& a = *self.inputs[0];
    Node& b = *self.inputs[1];
    // dA = dC · Bᵀ, dB = Aᵀ · dC
    if (a.requires_grad) K().gemm_nt(self.grad.data(), b.data.data(), a.grad_buffer(), m, n, k);
    if (b.requires_grad) K().gemm_tn(a.data.data(), self.grad.data(), b.grad_buffer(), k, m, n);
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "add");
  const NodePtr& bn = node_of(b, "add");
  require_same_shape(*an, *bn, "add");
  std::vector<double> out(an->data.size());
  K().add(an->data.data(), bn->data.data(), out.data(), out.size());
  return make_result(an->shape, std::move(out), {an, bn}, [](Node& self) {
    for (auto& in : self.inputs) {
      if (in->requires_grad) K().axpy(1.0, self.grad.data(), in->grad_buffer(), self.grad.size());
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "sub");
  const NodePtr& bn = node_of(b, "sub");
  require_same_shape(*an, *bn, "sub");
  std::vector<double> out(an->data.size());
  K().sub(an->data.data(), bn->data.data(), out.data(), out.size());
  return make_result(an->shape, std::move(out), {an, bn}, [](Node& self) {
    const std::size_t n = self.grad.size();
    if (self.inputs[0]->requires_grad) K().axpy(1.0, self.grad.data(), self.inputs[0]->grad_buffer(), n);
    if (self.inputs[1]->requires_grad) K().axpy(-1.0, self.grad.data(), self.inputs[1]->grad_buffer(), n);
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  const NodePtr& an = node_of(a, "mul");
  const NodePtr& bn = node_of(b, "mul");
  require_same_shape(*an, *bn, "mul");
  std::vector<double> out(an->data.size());
  K().mul(an->data.data(), bn->data.data(), out.data(), out.size());
  return make_result(an->shape, std::move(out), {an, bn}, [](Node& self) {
    Node& a = *self.inputs[0];
    Node& b = *self.inputs[1];
    const std::size_t n = self.grad.size();
    if (a.requires_grad) {
      double* ga = a.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) ga[i] += self.grad[i] * b.data[i];
    }
    if (b.requires_grad) {
      double* gb = b.grad_buffer();
      for (std::size_t i = 0; i < n; ++i) gb[i] += self.grad[i] * a.data[i];
    }
  });
}

Tensor mul_scalar(const Tensor& a, double s) {
  const NodePtr& an = node_of(a, "mul_scalar");
  std::vector<double> out(an->data.size());
  K().scale(s, an->data.data(), out.data(), out.size());
  return make_result(an->shape, std::move(out), {an}, [s](Node& self) {
    K().axpy(s, self.grad.data(), self.inputs[0]->grad_buffer(), self.grad.size());
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const NodePtr& xn = node_of(x, "add_bias");
  const NodePtr& bn = node_of(bias, "add_bias");
  if (bn->shape.rows != 1 || bn->shape.cols != xn->shape.cols) {
    throw DimensionError("add_bias: bias " + to_string(bn->shape) + " does not fit rows of " +
                         to_string(xn->shape));
  }
  const std::size_t rows = xn->shape.rows, cols = xn->shape.cols;
  std::vector<double> out(xn->data.size());
  for (std::size_t r = 0; r < rows; ++r) {
    K().add(xn->data.data() + r * cols, bn->data.data(), out.data() + r * cols, cols);
  }
  return make_result(xn->shape, std::move(out), {xn, bn}, [rows, cols](Node& self) {
    Node& x = *self.inputs[0];
    Node& b = *self.inputs[1];
    if (x.requires_grad) K().axpy(1.0, self.grad.data(), x.grad_buffer(), self.grad.size());
    if (b.requires_grad) {
      double* gb = b.grad_buffer();
      for (std::size_t r = 0; r < rows; ++r) K().axpy(1.0, self.grad.data() + r * cols, gb, cols);
    }
  });
}

Tensor exp(const Tensor& a) {
  const NodePtr& an = node_of(a, "exp");
  std::vector<double> out(an->data.size());
  std::transform(an->data.begin(), an->data.end(), out.begin(), [](double v) { return std::exp(v); });
  return make_result(an->shape, std::move(out), {an}, [](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * self.data[i];
  });
}

Tensor log(const Tensor& a) {
  const NodePtr& an = node_of(a, "log");
  std::vector<double> out(an->data.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = an->data[i];
    if (!(v > 0.0)) {
      throw DomainError("log: nonpositive input " + std::to_string(v) + " at index " +
                        std::to_string(i));
    }
    out[i] = std::log(v);
  }
  return make_result(an->shape, std::move(out), {an}, [](Node& self) {
    const Node& in = *self.inputs[0];
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] / in.data[i];
  });
}

Tensor relu(const Tensor& a) {
  const NodePtr& an = node_of(a, "relu");
  std::vector<double> out(an->data.size());
  K().relu(an->data.data(), out.data(), out.size());
  return make_result(an->shape, std::move(out), {an}, [](Node& self) {
    Node& in = *self.inputs[0];
    K().relu_backward(in.data.data(), self.grad.data(), in.grad_buffer(), self.grad.size());
  });
}

Tensor square(const Tensor& a) {
  const NodePtr& an = node_of(a, "square");
  std::vector<double> out(an->data.size());
  K().mul(an->data.data(), an->data.data(), out.data(), out.size());
  return make_result(an->shape, std::move(out), {an}, [](Node& self) {
    Node& in = *self.inputs[0];
    double* g = in.grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += 2.0 * in.data[i] * self.grad[i];
  });
}

Tensor sum_all(const Tensor& a) {
  const NodePtr& an = node_of(a, "sum_all");
  const double s = K().sum(an->data.data(), an->data.size());
  return make_result({1, 1}, {s}, {an}, [](Node& self) {
    Node& in = *self.inputs[0];
    double* g = in.grad_buffer();
    const double go = self.grad[0];
    for (std::size_t i = 0; i < in.data.size(); ++i) g[i] += go;
  });
}

Tensor sum_rows(const Tensor& a) {
  const NodePtr& an = node_of(a, "sum_rows");
  const std::size_t rows = an->shape.rows, cols = an->shape.cols;
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = K().sum(an->data.data() + r * cols, cols);
  return make_result({rows, 1}, std::move(out), {an}, [rows, cols](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += self.grad[r];
    }
  });
}

Tensor sum_cols(const Tensor& a) {
  const NodePtr& an = node_of(a, "sum_cols");
  const std::size_t rows = an->shape.rows, cols = an->shape.cols;
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) K().axpy(1.0, an->data.data() + r * cols, out.data(), cols);
  return make_result({1, cols}, std::move(out), {an}, [rows, cols](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) K().axpy(1.0, self.grad.data(), g + r * cols, cols);
  });
}

Tensor transpose(const Tensor& a) {
  const NodePtr& an = node_of(a, "transpose");
  const std::size_t rows = an->shape.rows, cols = an->shape.cols;
  std::vector<double> out(an->data.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = an->data[r * cols + c];
  }
  return make_result({cols, rows}, std::move(out), {an}, [rows, cols](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += self.grad[c * rows + r];
    }
  });
}

Tensor diagonal(const Tensor& a) {
  const NodePtr& an = node_of(a, "diagonal");
  if (an->shape.rows != an->shape.cols) {
    throw DimensionError("diagonal: expected a square matrix, got " + to_string(an->shape));
  }
  const std::size_t n = an->shape.rows;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = an->data[i * n + i];
  return make_result({n, 1}, std::move(out), {an}, [n](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < n; ++i) g[i * n + i] += self.grad[i];
  });
}

Tensor l2_normalize_rows(const Tensor& a) {
  const NodePtr& an = node_of(a, "l2_normalize_rows");
  const std::size_t rows = an->shape.rows, cols = an->shape.cols;
  std::vector<double> out(an->data.size());
  std::vector<double> norms(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = an->data.data() + r * cols;
    const double nrm = std::sqrt(K().dot(x, x, cols));
    if (!(nrm > 0.0)) {
      throw DegenerateInputError("l2_normalize_rows: row " + std::to_string(r) + " has zero norm");
    }
    norms[r] = nrm;
    K().scale(1.0 / nrm, x, out.data() + r * cols, cols);
  }
  return make_result(an->shape, std::move(out), {an},
                     [rows, cols, norms = std::move(norms)](Node& self) {
                       double* g = self.inputs[0]->grad_buffer();
                       for (std::size_t r = 0; r < rows; ++r) {
                         const double* y = self.data.data() + r * cols;
                         const double* go = self.grad.data() + r * cols;
                         const double proj = K().dot(y, go, cols);
                         const double inv = 1.0 / norms[r];
                         for (std::size_t c = 0; c < cols; ++c) {
                           g[r * cols + c] += (go[c] - y[c] * proj) * inv;
                         }
                       }
                     });
}

Tensor softmax_rows(const Tensor& a) {
  const NodePtr& an = node_of(a, "softmax_rows");
  const std::size_t rows = an->shape.rows, cols = an->shape.cols;
  std::vector<double> out(an->data.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = an->data.data() + r * cols;
    double* y = out.data() + r * cols;
    const double m = K().max(x, cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - m);
      total += y[c];
    }
    K().scale(1.0 / total, y, y, cols);
  }
  return make_result(an->shape, std::move(out), {an}, [rows, cols](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * cols;
      const double* go = self.grad.data() + r * cols;
      const double inner = K().dot(y, go, cols);
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += y[c] * (go[c] - inner);
    }
  });
}

Tensor log_softmax_rows(const Tensor& a) {
  const NodePtr& an = node_of(a, "log_softmax_rows");
  const std::size_t rows = an->shape.rows, cols = an->shape.cols;
  std::vector<double> out(an->data.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = an->data.data() + r * cols;
    const double m = K().max(x, cols);
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) total += std::exp(x[c] - m);
    const double lse = m + std::log(total);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x[c] - lse;
  }
  return make_result(an->shape, std::move(out), {an}, [rows, cols](Node& self) {
    double* g = self.inputs[0]->grad_buffer();
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = self.data.data() + r * cols;
      const double* go = self.grad.data() + r * cols;
      const double gsum = K().sum(go, cols);
      for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += go[c] - std::exp(y[c]) * gsum;
    }
  });
}

}  // namespace drc
