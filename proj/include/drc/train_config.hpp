#pragma once

#include <cstddef>
#include <cstdint>

namespace drc {

/// Hyperparameters of one training run.
struct TrainConfig {
  std::size_t k = 10;
  double lr = 1e-4;
  std::size_t epochs = 500;
  std::size_t batch_size = 256;
  double lambda = 0.005;
  double t_af = 0.5;
  double t_ap = 0.95;
  // 2 = the original plus one augmented view; each extra view adds another contrasted pair.
  std::size_t views_per_sample = 2;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Row-L2-normalize assignment features before the AF dot products.
  bool normalize_af = true;

  // Ablation switches: a disabled term contributes exactly 0 to the objective.
  bool disable_af = false;
  bool disable_ap = false;
  bool disable_cr = false;
};

/// Throws ParameterError listing the first violated constraint. `dataset_size`
/// of 0 skips the batch-size check.
void validate(const TrainConfig& cfg, std::size_t dataset_size = 0);

}  // namespace drc
