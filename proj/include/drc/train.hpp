#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "drc/augment.hpp"
#include "drc/data.hpp"
#include "drc/metrics.hpp"
#include "drc/model.hpp"
#include "drc/train_config.hpp"

namespace drc {

/// First and second moment estimates, one buffer per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

/// One bias-corrected Adam update. An empty gradient span is treated as zeros.
void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const TrainConfig& cfg);

/// Applies adam_step to the model's parameters using their accumulated gradients.
void adam_step(ClusterModel& model, AdamState& state, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double af = 0.0;
  double ap = 0.0;
  double cr = 0.0;
  double total = 0.0;
  std::optional<double> acc;
  std::optional<double> nmi;
  std::optional<double> ari;
  std::vector<std::size_t> cluster_sizes;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

/// Predictions and metrics of a model on a whole dataset.
struct Evaluation {
  Tensor z;
  Tensor p;
  std::vector<int> labels;
  std::vector<std::size_t> cluster_sizes;
  std::optional<double> acc;
  std::optional<double> nmi;
  std::optional<double> ari;
  std::optional<VarianceReport> variance;

  /// Largest cluster's share of the samples.
  double max_cluster_share() const;
};

Evaluation evaluate(const ClusterModel& model, const Dataset& ds);

struct TrainResult {
  ClusterModel model;
  TrainHistory history;
};

/// Shuffled minibatches per epoch; the trailing partial batch is dropped.
std::size_t steps_per_epoch(std::size_t dataset_size, std::size_t batch_size);

/// Minibatch training with Adam on af + ap + λ·cr. The input model is not modified.
/// `log`, when set, receives one line per epoch.
TrainResult train(const ClusterModel& model, const Dataset& ds, const TrainConfig& cfg,
                  const AugmentSpec& augment, std::ostream* log = nullptr);

}  // namespace drc
