#pragma once

// Multi-trial training runs, evaluation and the files they produce.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "drc/config.hpp"
#include "drc/train.hpp"

namespace drc {

/// Loads or generates the dataset and applies the configured preprocessing.
Dataset prepare_dataset(const RunConfig& cfg);

/// The config with k filled in from the dataset when train.k was not given.
RunConfig resolve_for_dataset(RunConfig cfg, const Dataset& ds);

/// Augmentation spec with relative noise scales resolved against the dataset.
AugmentSpec resolve_augment(const RunConfig& cfg, const Dataset& ds, std::uint64_t trial);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  ClusterModel model;
  TrainHistory history;
  Evaluation eval;
};

struct MetricSummary {
  double acc = 0.0;
  double nmi = 0.0;
  double ari = 0.0;
};

struct ExperimentResult {
  RunConfig config;  // resolved
  std::vector<TrialResult> trials;
  bool labeled = false;
  MetricSummary mean;
  MetricSummary best;
  std::size_t best_trial = 0;
  double mean_max_cluster_share = 0.0;
};

/// Runs cfg.trials independent trials; trial t seeds model init, shuffling and augmentation
/// with train.seed + t and augment.seed + t.
ExperimentResult run_experiment(const RunConfig& cfg, const Dataset& ds, std::ostream* log = nullptr);

nlohmann::ordered_json metrics_json(const ExperimentResult& result);
nlohmann::ordered_json evaluation_json(const Evaluation& ev, const ClusterModel& model);

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
void write_embeddings_csv(const Evaluation& ev, const Dataset& ds, const std::filesystem::path& path);

/// metrics.json, history.csv, model.drcm and embeddings.csv for the best trial, plus
/// per-trial histories under trials/.
void write_outputs(const ExperimentResult& result, const Dataset& ds, const std::filesystem::path& dir);

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);

struct SweepRow {
  std::string key;
  std::string value;
  ExperimentResult result;
};

/// One experiment per value of `key`.
std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& key,
                                const std::vector<std::string>& values, std::ostream* log = nullptr);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace drc
