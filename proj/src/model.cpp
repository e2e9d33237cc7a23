#include "drc/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "drc/error.hpp"

namespace drc {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
}

ClusterModel ClusterModel::init(std::span<const std::size_t> layer_sizes, std::uint64_t seed) {
  if (layer_sizes.size() < 2) {
    throw ParameterError("model needs at least an input and an output size");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw ParameterError("layer sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t in = layer_sizes[l], out = layer_sizes[l + 1];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(in)));
    std::vector<double> w(in * out);
    for (double& v : w) v = dist(rng);
    weights.emplace_back(Shape{in, out}, std::move(w), true);
    biases.push_back(Tensor::zeros({1, out}, true));
  }
  return ClusterModel(std::move(weights), std::move(biases));
}

ClusterModel::ClusterModel(std::vector<Tensor> weights, std::vector<Tensor> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  if (weights_.empty() || weights_.size() != biases_.size()) {
    throw ParameterError("model needs one bias per weight matrix and at least one layer");
  }
  sizes_.push_back(weights_.front().rows());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const Tensor& w = weights_[l];
    if (w.rows() != sizes_.back()) {
      throw DimensionError("layer " + std::to_string(l) + " expects " + std::to_string(w.rows()) +
                           " inputs but previous layer emits " + std::to_string(sizes_.back()));
    }
    if (biases_[l].shape() != Shape{1, w.cols()}) {
      throw DimensionError("layer " + std::to_string(l) + " bias " + to_string(biases_[l].shape()) +
                           " does not match weight " + to_string(w.shape()));
    }
    sizes_.push_back(w.cols());
  }
}

std::size_t ClusterModel::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) total += weights_[l].numel() + biases_[l].numel();
  return total;
}

std::vector<Tensor> ClusterModel::parameters() const {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(weights_[l]);
    out.push_back(biases_[l]);
  }
  return out;
}

Tensor ClusterModel::features(const Tensor& x) const {
  if (x.cols() != input_dim()) {
    throw DimensionError("model expects " + std::to_string(input_dim()) + " input columns, got " +
                         to_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    h = add_bias(matmul(h, weights_[l]), biases_[l]);
    if (l + 1 < weights_.size()) h = relu(h);
  }
  return h;
}

ClusterModel::Output ClusterModel::forward(const Tensor& x) const {
  Tensor z = features(x);
  Tensor p = softmax_rows(z);
  return {std::move(z), std::move(p)};
}

std::vector<int> ClusterModel::predict(const Tensor& x) const {
  // Evaluate on detached copies so no graph is retained.
  ClusterModel frozen;
  frozen.sizes_ = sizes_;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    frozen.weights_.push_back(weights_[l].detach());
    frozen.biases_.push_back(biases_[l].detach());
  }
  return argmax_rows(frozen.features(x.detach()));
}

ClusterModel ClusterModel::clone() const {
  std::vector<Tensor> w, b;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    w.push_back(weights_[l].detach(true));
    b.push_back(biases_[l].detach(true));
  }
  return ClusterModel(std::move(w), std::move(b));
}

std::vector<int> argmax_rows(const Tensor& m) {
  std::vector<int> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c] > row[best]) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

void ClusterModel::save(const std::filesystem::path& path) const {
  binio::Writer w;
  w.bytes("DRCM", 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(weights_.size()));
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    w.u32(static_cast<std::uint32_t>(weights_[l].rows()));
    w.u32(static_cast<std::uint32_t>(weights_[l].cols()));
    for (double v : weights_[l].data()) w.f64(v);
    for (double v : biases_[l].data()) w.f64(v);
  }
  binio::write_file(path.string(), w.buffer());
}

ClusterModel ClusterModel::load(const std::filesystem::path& path) {
  const auto bytes = binio::read_file(path.string());
  binio::Reader r(bytes, "checkpoint " + path.string());
  r.magic("DRCM");
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint " + path.string() + ": unsupported version " +
                      std::to_string(version) + " at byte offset " + std::to_string(version_at));
  }
  const std::uint32_t layers = r.u32();
  if (layers == 0) throw FormatError("checkpoint " + path.string() + ": zero layers");
  std::vector<Tensor> weights, biases;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::size_t rows = r.u32(), cols = r.u32();
    if (rows == 0 || cols == 0) {
      throw FormatError("checkpoint " + path.string() + ": empty layer at byte offset " +
                        std::to_string(r.offset() - 8));
    }
    r.need((rows * cols + cols) * 8);
    std::vector<double> w(rows * cols), b(cols);
    for (double& v : w) v = r.f64();
    for (double& v : b) v = r.f64();
    weights.emplace_back(Shape{rows, cols}, std::move(w), true);
    biases.emplace_back(Shape{1, cols}, std::move(b), true);
  }
  if (r.offset() != r.size()) {
    throw FormatError("checkpoint " + path.string() + ": " + std::to_string(r.size() - r.offset()) +
                      " trailing bytes at byte offset " + std::to_string(r.offset()));
  }
  return ClusterModel(std::move(weights), std::move(biases));
}

}  // namespace drc
