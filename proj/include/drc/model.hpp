#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "drc/tensor.hpp"

namespace drc {

/// Multilayer perceptron Φ mapping an input row to a K-dimensional assignment
/// feature. Hidden layers use a rectifier; the final (clustering head) layer is linear.
class ClusterModel {
 public:
  /// `layer_sizes` = {input D, hidden..., K}. Weights ~ Normal(0, 2/fan_in), biases 0.
  static ClusterModel init(std::span<const std::size_t> layer_sizes, std::uint64_t seed);

  /// Builds a model from explicit per-layer weights (in×out) and biases (1×out).
  ClusterModel(std::vector<Tensor> weights, std::vector<Tensor> biases);

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t k() const { return sizes_.back(); }
  std::size_t layer_count() const { return weights_.size(); }
  std::size_t parameter_count() const;

  const Tensor& weight(std::size_t layer) const { return weights_.at(layer); }
  const Tensor& bias(std::size_t layer) const { return biases_.at(layer); }

  /// Weight and bias tensors in layer order (w0, b0, w1, b1, ...); handles share storage.
  std::vector<Tensor> parameters() const;

  /// Assignment features z for each row of x.
  Tensor features(const Tensor& x) const;

  struct Output {
    Tensor z;  // N×K assignment features
    Tensor p;  // N×K assignment probabilities
  };
  Output forward(const Tensor& x) const;

  /// argmax_j p_ij per row, ties to the lowest index. Runs without recording a graph.
  std::vector<int> predict(const Tensor& x) const;

  /// Deep copy with gradient tracking on every parameter.
  ClusterModel clone() const;

  void save(const std::filesystem::path& path) const;
  static ClusterModel load(const std::filesystem::path& path);

 private:
  ClusterModel() = default;
  std::vector<std::size_t> sizes_;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

/// Per-row argmax with ties broken by the lowest column index.
std::vector<int> argmax_rows(const Tensor& m);

}  // namespace drc
