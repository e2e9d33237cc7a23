#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "drc/tensor.hpp"

namespace drc {

struct Dataset {
  Tensor x;                       // N×D features
  std::optional<std::vector<int>> y;  // labels in [0, k_true)
  std::size_t k_true = 0;         // 0 when unlabeled
  std::string name;

  std::size_t size() const { return x.rows(); }
  std::size_t dim() const { return x.cols(); }
  bool labeled() const { return y.has_value(); }
};

/// Throws FormatError if labels are out of range or counts disagree.
void validate(const Dataset& ds);

struct BlobsParams {
  std::size_t k = 4;
  std::size_t n_per = 500;
  std::size_t d = 16;
  double center_spread = 10.0;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian clusters around centers drawn in [-spread, spread]^d that
/// are pairwise at least 6σ apart. Rows are grouped by class.
Dataset gen_blobs(const BlobsParams& params);

struct RingsParams {
  std::size_t k = 2;
  std::size_t n_per = 500;
  double radius_gap = 1.0;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

/// Concentric 2-D rings; ring c has radius (c+1)·radius_gap plus radial Gaussian noise.
Dataset gen_rings(const RingsParams& params);

/// DRCD container header size in bytes.
inline constexpr std::size_t kDrcdHeaderBytes = 4 + 4 + 8 + 8 + 1 + 4;

void save_drcd(const Dataset& ds, const std::filesystem::path& path);
Dataset load_drcd(const std::filesystem::path& path);

/// Comma-separated features with a header row; a last column named "label" holds class ids.
Dataset load_csv(const std::filesystem::path& path);

/// Dispatches on extension: .csv → load_csv, anything else → load_drcd.
Dataset load_dataset(const std::filesystem::path& path);

/// CIFAR-10 binary batches (data_batch_1..5.bin, test_batch.bin) joined into one set,
/// pixels scaled to [0,1], channel-major rows of 3072.
Dataset load_cifar10_binary(const std::filesystem::path& dir);

/// Keeps the first `max_total` samples (0 = all) whose labels are in `classes`, relabeled 0..|classes|-1.
Dataset subset_classes(const Dataset& ds, const std::vector<int>& classes, std::size_t max_total = 0);

/// Per-feature population standard deviation.
std::vector<double> feature_std(const Tensor& x);

/// Per-feature standardization to zero mean and unit variance; constant features become 0.
Dataset zscore(const Dataset& ds);

}  // namespace drc
