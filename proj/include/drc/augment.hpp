#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drc/tensor.hpp"

namespace drc {

enum class AugmentKind { gaussian_noise, feature_dropout, image_basic };

std::string to_string(AugmentKind kind);
/// Throws ParameterError on unknown names.
AugmentKind parse_augment_kind(const std::string& name);

struct AugmentSpec {
  AugmentKind kind = AugmentKind::gaussian_noise;
  // gaussian_noise: per-feature standard deviation is noise_sigma * feature_scale[d]
  // (feature_scale empty means 1 for every feature).
  double noise_sigma = 0.5;
  std::vector<double> feature_scale;
  double dropout_prob = 0.0;
  // image_basic, rows laid out channel-major (C planes of H×W).
  double flip_prob = 0.5;
  std::size_t crop_padding = 0;
  double jitter_strength = 0.0;
  std::size_t image_channels = 3;
  std::size_t image_height = 0;  // 0: infer a square image from D / channels
  std::size_t image_width = 0;
  std::uint64_t seed = 0;
};

void validate(const AugmentSpec& spec);

/// Counter-based generator: the stream is a pure function of its key, so a
/// sample's augmentation does not depend on which batch it lands in.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, std::uint64_t step, std::uint64_t index);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double normal();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Augmented copy of x. Row r draws from the stream keyed by (spec.seed, step,
/// indices[r]); with empty `indices` the row position is used.
Tensor augment_batch(const Tensor& x, const AugmentSpec& spec, std::uint64_t step,
                     std::span<const std::size_t> indices = {});

}  // namespace drc
