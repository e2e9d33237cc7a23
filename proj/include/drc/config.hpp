#pragma once

// Run configuration in flat `section.key=value` text form.
//
//   # comment
//   train.lr=0.0001
//   data.generator=blobs
//   model.hidden=64
//
// Unknown keys and unparsable values are collected and reported together.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "drc/augment.hpp"
#include "drc/data.hpp"
#include "drc/error.hpp"
#include "drc/train_config.hpp"

namespace drc {

struct DataSource {
  std::string path;       // DRCD or CSV file; used when generator is empty
  std::string generator;  // "blobs", "rings", "cifar10" or empty
  BlobsParams blobs;
  RingsParams rings;
  std::string cifar_dir;
  std::vector<int> classes;   // optional class subset (labels remapped in order)
  std::size_t max_samples = 0;  // 0 = all
  bool zscore = false;
};

struct RunConfig {
  TrainConfig train;
  bool k_from_data = true;  // train.k not given: use the dataset's class count
  AugmentSpec augment;
  // Multiply noise_sigma by each feature's standard deviation over the dataset.
  bool augment_relative_sigma = true;
  DataSource data;
  std::vector<std::size_t> hidden{64};
  std::string out_dir;
  std::size_t trials = 5;
};

class ConfigError : public ParameterError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Applies one assignment; unqualified ablation names (disable_ap) and bare train keys
/// (lambda, batch_size) are accepted as shorthands. Throws ConfigError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical key=value form of every setting, sorted by key.
std::map<std::string, std::string> to_key_values(const RunConfig& cfg);
std::string format_config(const RunConfig& cfg);

/// Layer sizes for a dataset of dimension d: {d, hidden..., k}.
std::vector<std::size_t> layer_sizes(const RunConfig& cfg, std::size_t d);

}  // namespace drc
