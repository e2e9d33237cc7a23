#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "drc/tensor.hpp"

namespace drc {

/// Minimum-cost perfect assignment for a square cost matrix given row-major.
/// Returns assignment[row] = column.
std::vector<int> hungarian(std::span<const double> cost, std::size_t n);

struct ContingencyTable {
  std::size_t k_pred = 0;
  std::size_t k_true = 0;
  std::vector<std::size_t> counts;  // k_pred × k_true row-major
  std::size_t n = 0;

  std::size_t at(std::size_t pred, std::size_t truth) const { return counts[pred * k_true + truth]; }
  std::vector<std::size_t> pred_sizes() const;
  std::vector<std::size_t> true_sizes() const;
};

/// Label counts are max label + 1 per side. Throws on length mismatch or negative labels.
ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth);

/// Accuracy under the best one-to-one relabeling of predicted clusters; labels in [0, k).
double acc(std::span<const int> pred, std::span<const int> truth, std::size_t k);

/// I(pred; truth) / sqrt(H(pred) H(truth)) with natural logs; 0 when either entropy is 0.
double nmi(std::span<const int> pred, std::span<const int> truth);

/// Adjusted Rand index; 0/0 is defined as 0.
double ari(std::span<const int> pred, std::span<const int> truth);

/// Number of samples assigned to each of k clusters.
std::vector<std::size_t> cluster_histogram(std::span<const int> pred, std::size_t k);

struct VarianceReport {
  std::vector<double> intra;           // per class, NaN for skipped classes
  std::vector<int> skipped_classes;    // classes without samples
  double inter = 0.0;
};

/// Intra-class: mean squared distance of a class's rows to its centroid.
/// Inter-class: mean squared distance of class centroids to the global centroid.
VarianceReport variance_report(const Tensor& p, std::span<const int> truth);

}  // namespace drc
