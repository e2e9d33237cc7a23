#include "drc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "drc/error.hpp"

namespace drc {

using nlohmann::ordered_json;

Dataset prepare_dataset(const RunConfig& cfg) {
  Dataset ds;
  if (cfg.data.generator == "blobs") {
    ds = gen_blobs(cfg.data.blobs);
  } else if (cfg.data.generator == "rings") {
    ds = gen_rings(cfg.data.rings);
  } else if (cfg.data.generator == "cifar10") {
    ds = load_cifar10_binary(cfg.data.cifar_dir);
  } else {
    ds = load_dataset(cfg.data.path);
  }
  if (!cfg.data.classes.empty()) {
    ds = subset_classes(ds, cfg.data.classes, cfg.data.max_samples);
  } else if (cfg.data.max_samples > 0 && cfg.data.max_samples < ds.size()) {
    std::vector<int> all;
    for (std::size_t c = 0; c < ds.k_true; ++c) all.push_back(static_cast<int>(c));
    if (ds.labeled()) ds = subset_classes(ds, all, cfg.data.max_samples);
  }
  if (cfg.data.zscore) ds = zscore(ds);
  return ds;
}

RunConfig resolve_for_dataset(RunConfig cfg, const Dataset& ds) {
  if (cfg.k_from_data) {
    if (!ds.labeled()) throw ParameterError("train.k is required for unlabeled data");
    cfg.train.k = ds.k_true;
    cfg.k_from_data = false;
  }
  validate(cfg.train, ds.size());
  return cfg;
}

AugmentSpec resolve_augment(const RunConfig& cfg, const Dataset& ds, std::uint64_t trial) {
  AugmentSpec spec = cfg.augment;
  spec.seed = cfg.augment.seed + trial;
  if (spec.kind == AugmentKind::gaussian_noise && cfg.augment_relative_sigma) {
    spec.feature_scale = feature_std(ds.x);
  }
  return spec;
}

ExperimentResult run_experiment(const RunConfig& raw, const Dataset& ds, std::ostream* log) {
  ExperimentResult result;
  result.config = resolve_for_dataset(raw, ds);
  const RunConfig& cfg = result.config;
  result.labeled = ds.labeled();
  const auto sizes = layer_sizes(cfg, ds.dim());

  for (std::size_t t = 0; t < cfg.trials; ++t) {
    TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + t;
    if (log) *log << "trial " << t << " (seed " << tc.seed << ")\n";
    const ClusterModel init = ClusterModel::init(sizes, tc.seed);
    TrainResult trained = train(init, ds, tc, resolve_augment(cfg, ds, t), log);
    Evaluation ev = evaluate(trained.model, ds);
    result.trials.push_back(
        TrialResult{t, tc.seed, std::move(trained.model), std::move(trained.history), std::move(ev)});
  }

  const double n = static_cast<double>(result.trials.size());
  for (const auto& tr : result.trials) result.mean_max_cluster_share += tr.eval.max_cluster_share() / n;
  if (result.labeled) {
    result.best = {-1.0, -1.0, -2.0};
    for (const auto& tr : result.trials) {
      result.mean.acc += *tr.eval.acc / n;
      result.mean.nmi += *tr.eval.nmi / n;
      result.mean.ari += *tr.eval.ari / n;
      result.best.acc = std::max(result.best.acc, *tr.eval.acc);
      result.best.nmi = std::max(result.best.nmi, *tr.eval.nmi);
      result.best.ari = std::max(result.best.ari, *tr.eval.ari);
    }
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
      if (*result.trials[t].eval.acc > *result.trials[result.best_trial].eval.acc) result.best_trial = t;
    }
  } else {
    auto final_total = [](const TrialResult& tr) {
      return tr.history.epochs.empty() ? 0.0 : tr.history.epochs.back().total;
    };
    for (std::size_t t = 0; t < result.trials.size(); ++t) {
      if (final_total(result.trials[t]) < final_total(result.trials[result.best_trial])) result.best_trial = t;
    }
  }
  return result;
}

namespace {

ordered_json optional_number(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

ordered_json losses_json(const TrainHistory& h) {
  if (h.epochs.empty()) return ordered_json();
  const auto& e = h.epochs.back();
  return ordered_json{{"af", e.af}, {"ap", e.ap}, {"cr", e.cr}, {"total", e.total}};
}

}  // namespace

ordered_json evaluation_json(const Evaluation& ev, const ClusterModel& model) {
  ordered_json j;
  j["n"] = ev.labels.size();
  j["k"] = model.k();
  j["labeled"] = ev.acc.has_value();
  j["acc"] = optional_number(ev.acc);
  j["nmi"] = optional_number(ev.nmi);
  j["ari"] = optional_number(ev.ari);
  j["cluster_sizes"] = ev.cluster_sizes;
  j["max_cluster_share"] = ev.max_cluster_share();
  if (ev.variance) {
    ordered_json intra = ordered_json::array();
    for (double v : ev.variance->intra) intra.push_back(std::isnan(v) ? ordered_json() : ordered_json(v));
    j["variance"] = {{"intra", intra}, {"inter", ev.variance->inter}, {"skipped_classes", ev.variance->skipped_classes}};
  } else {
    j["variance"] = nullptr;
  }
  return j;
}

ordered_json metrics_json(const ExperimentResult& r) {
  ordered_json j;
  j["schema_version"] = 1;
  j["labeled"] = r.labeled;
  j["trials_count"] = r.trials.size();
  ordered_json trials = ordered_json::array();
  for (const auto& tr : r.trials) {
    ordered_json t = evaluation_json(tr.eval, tr.model);
    t["trial"] = tr.trial;
    t["seed"] = tr.seed;
    t["epochs"] = tr.history.epochs.size();
    t["final_losses"] = losses_json(tr.history);
    trials.push_back(std::move(t));
  }
  j["trials"] = std::move(trials);
  if (r.labeled) {
    j["mean"] = {{"acc", r.mean.acc}, {"nmi", r.mean.nmi}, {"ari", r.mean.ari}};
    j["best"] = {{"acc", r.best.acc}, {"nmi", r.best.nmi}, {"ari", r.best.ari}};
  } else {
    j["mean"] = nullptr;
    j["best"] = nullptr;
  }
  j["best_trial"] = r.best_trial;
  j["mean_max_cluster_share"] = r.mean_max_cluster_share;
  ordered_json cfg;
  // The output location is left out so reruns into another directory compare equal.
  for (const auto& [k, v] : to_key_values(r.config)) {
    if (k != "run.out_dir") cfg[k] = v;
  }
  j["config"] = std::move(cfg);
  return j;
}

void write_json(const ordered_json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

namespace {

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

std::string csv_number(double v) { return csv_number(std::optional<double>(v)); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "epoch,af,ap,cr,total,acc,nmi,ari\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << csv_number(e.af) << ',' << csv_number(e.ap) << ',' << csv_number(e.cr) << ','
        << csv_number(e.total) << ',' << csv_number(e.acc) << ',' << csv_number(e.nmi) << ','
        << csv_number(e.ari) << '\n';
  }
}

void write_embeddings_csv(const Evaluation& ev, const Dataset& ds, const std::filesystem::path& path) {
  auto out = open_out(path);
  const std::size_t k = ev.z.cols();
  for (std::size_t c = 0; c < k; ++c) out << "z" << c << ',';
  for (std::size_t c = 0; c < k; ++c) out << "p" << c << ',';
  out << "pred" << (ds.labeled() ? ",label" : "") << '\n';
  for (std::size_t i = 0; i < ev.labels.size(); ++i) {
    for (double v : ev.z.row(i)) out << csv_number(v) << ',';
    for (double v : ev.p.row(i)) out << csv_number(v) << ',';
    out << ev.labels[i];
    if (ds.labeled()) out << ',' << (*ds.y)[i];
    out << '\n';
  }
}

void write_outputs(const ExperimentResult& r, const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "trials", ec);
  if (ec) throw IoError("cannot create " + (dir / "trials").string() + ": " + ec.message());
  write_json(metrics_json(r), dir / "metrics.json");
  const TrialResult& best = r.trials.at(r.best_trial);
  write_history_csv(best.history, dir / "history.csv");
  best.model.save(dir / "model.drcm");
  write_embeddings_csv(best.eval, ds, dir / "embeddings.csv");
  for (const auto& tr : r.trials) {
    write_history_csv(tr.history, dir / "trials" / ("trial_" + std::to_string(tr.trial) + "_history.csv"));
  }
}

std::vector<SweepRow> run_sweep(const RunConfig& base, const std::string& key,
                                const std::vector<std::string>& values, std::ostream* log) {
  if (values.empty()) throw ParameterError("sweep over '" + key + "' has no values");
  std::vector<SweepRow> rows;
  for (const auto& value : values) {
    RunConfig cfg = base;
    apply_setting(cfg, key, value);
    const Dataset ds = prepare_dataset(cfg);
    if (log) *log << "sweep " << key << "=" << value << '\n';
    rows.push_back({key, value, run_experiment(cfg, ds, log)});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "key,value,trials,acc_mean,nmi_mean,ari_mean,acc_best,nmi_best,ari_best,max_cluster_share_mean\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    out << row.key << ',' << row.value << ',' << r.trials.size() << ',';
    if (r.labeled) {
      out << csv_number(r.mean.acc) << ',' << csv_number(r.mean.nmi) << ',' << csv_number(r.mean.ari) << ','
          << csv_number(r.best.acc) << ',' << csv_number(r.best.nmi) << ',' << csv_number(r.best.ari) << ',';
    } else {
      out << ",,,,,,";
    }
    out << csv_number(r.mean_max_cluster_share) << '\n';
  }
  return out.str();
}

}  // namespace drc
