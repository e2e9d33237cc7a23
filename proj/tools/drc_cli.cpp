// drc: dataset generation, training, evaluation, ablation sweeps and bound checks.
//
// Exit codes: 0 success, 1 usage error, 2 data/config error, 3 invariant violation.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "drc/config.hpp"
#include "drc/data.hpp"
#include "drc/error.hpp"
#include "drc/experiment.hpp"
#include "drc/kernels.hpp"
#include "drc/losses.hpp"
#include "drc/mioracle.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

struct GenDataArgs {
  std::string kind = "blobs";
  std::string out;
  drc::BlobsParams blobs;
  drc::RingsParams rings;
  std::size_t k = 0;      // 0: 4 for blobs, 2 for rings
  std::size_t n_per = 0;  // 0: generator default
  std::uint64_t seed = 0;
};

int cmd_gen_data(const GenDataArgs& a) {
  drc::Dataset ds;
  if (a.kind == "blobs") {
    drc::BlobsParams p = a.blobs;
    p.seed = a.seed;
    if (a.k) p.k = a.k;
    if (a.n_per) p.n_per = a.n_per;
    ds = drc::gen_blobs(p);
  } else {
    drc::RingsParams p = a.rings;
    p.seed = a.seed;
    if (a.k) p.k = a.k;
    if (a.n_per) p.n_per = a.n_per;
    ds = drc::gen_rings(p);
  }
  drc::save_drcd(ds, a.out);
  std::cout << "N=" << ds.size() << " D=" << ds.dim() << " k=" << ds.k_true << '\n';
  return 0;
}

drc::RunConfig load_with_overrides(const std::string& path, const std::vector<std::string>& ablate,
                                   const std::string& out_dir) {
  drc::RunConfig cfg = drc::load_config(path);
  for (const auto& flag : ablate) drc::apply_setting(cfg, flag, "true");
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  return cfg;
}

int cmd_train(const std::string& config, const std::string& out, const std::vector<std::string>& ablate,
              bool verbose) {
  drc::RunConfig cfg = load_with_overrides(config, ablate, out);
  if (cfg.out_dir.empty()) throw drc::ConfigError({"an output directory is required (--out or run.out_dir)"});
  const drc::Dataset ds = drc::prepare_dataset(cfg);
  const auto result = drc::run_experiment(cfg, ds, verbose ? &std::cerr : nullptr);
  drc::write_outputs(result, ds, cfg.out_dir);
  if (result.labeled) {
    std::cout << "mean acc=" << result.mean.acc << " nmi=" << result.mean.nmi << " ari=" << result.mean.ari
              << "\nbest acc=" << result.best.acc << " nmi=" << result.best.nmi << " ari=" << result.best.ari
              << '\n';
  }
  std::cout << "wrote " << cfg.out_dir << '\n';
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& config,
             const std::string& out) {
  drc::RunConfig cfg;
  if (!config.empty()) cfg = drc::load_config(config);
  if (!data_path.empty()) {
    cfg.data.generator.clear();
    cfg.data.path = data_path;
  }
  const drc::Dataset ds = drc::prepare_dataset(cfg);
  const drc::ClusterModel model = drc::ClusterModel::load(model_path);
  if (model.input_dim() != ds.dim()) {
    throw drc::DimensionError("model expects " + std::to_string(model.input_dim()) + " features but dataset " +
                              ds.name + " has " + std::to_string(ds.dim()));
  }
  if (ds.labeled() && ds.k_true > model.k()) {
    throw drc::DimensionError("model has " + std::to_string(model.k()) + " clusters but dataset has " +
                              std::to_string(ds.k_true) + " classes");
  }
  const drc::Evaluation ev = drc::evaluate(model, ds);
  auto j = drc::evaluation_json(ev, model);

  // Whole-dataset objective with one augmented view.
  drc::TrainConfig tc = cfg.train;
  tc.k = model.k();
  const auto frozen = model.clone();
  const auto orig = frozen.forward(ds.x);
  const auto aug = frozen.forward(drc::augment_batch(ds.x, drc::resolve_augment(cfg, ds, 0), 0));
  const auto loss = drc::total_loss(orig.z, aug.z, orig.p, aug.p, tc);
  j["losses"] = {{"af", loss.af.item()}, {"ap", loss.ap.item()}, {"cr", loss.cr.item()}, {"total", loss.total.item()}};

  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    drc::write_json(j, out);
    std::cout << "wrote " << out << '\n';
  }
  return 0;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_ablate(const std::string& config, const std::string& sweep, const std::vector<std::string>& ablate,
               const std::string& out, bool verbose) {
  const auto eq = sweep.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw drc::ConfigError({"--sweep expects key=v1,v2,..., got '" + sweep + "'"});
  }
  const drc::RunConfig cfg = load_with_overrides(config, ablate, "");
  const auto rows = drc::run_sweep(cfg, sweep.substr(0, eq), split_values(sweep.substr(eq + 1)),
                                   verbose ? &std::cerr : nullptr);
  const std::string csv = drc::sweep_csv(rows);
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw drc::IoError("cannot open " + out + " for writing");
    f << csv;
    std::cout << "wrote " << out << '\n';
  }
  return 0;
}

int cmd_check_bound(std::size_t systems, std::size_t n_max, std::uint64_t seed, const std::string& out) {
  const auto summary = drc::mi::check_bound(systems, n_max, seed);
  std::ostringstream csv;
  csv.precision(17);
  csv << "system,n,c0,mi,bound,gap,rescale_delta,ok\n";
  for (const auto& r : summary.rows) {
    const bool ok = r.gap >= -drc::mi::kBoundTolerance && r.rescale_delta <= drc::mi::kRescaleTolerance;
    csv << r.index << ',' << r.n << ',' << r.c0 << ',' << r.mi << ',' << r.bound << ',' << r.gap << ','
        << r.rescale_delta << ',' << (ok ? 1 : 0) << '\n';
  }
  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw drc::IoError("cannot open " + out + " for writing");
    f << csv.str();
  }
  const bool pass = summary.violations == 0 && summary.rescale_failures == 0;
  std::cerr << (pass ? "PASS" : "FAIL") << ": " << summary.rows.size() << " systems, " << summary.violations
            << " bound violations (worst gap " << summary.worst_gap << "), " << summary.rescale_failures
            << " rescale failures\n";
  return pass ? 0 : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep robust clustering: training, evaluation and mutual-information bound checks"};
  app.require_subcommand(1);
  std::string kernels = "auto";
  app.add_option("--kernels", kernels, "Kernel variant: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic dataset (DRCD file)");
  gen_cmd->add_option("--kind", gen.kind, "blobs or rings")->check(CLI::IsMember({"blobs", "rings"}));
  gen_cmd->add_option("--out", gen.out, "Output path")->required();
  gen_cmd->add_option("--k", gen.k, "Number of classes");
  gen_cmd->add_option("--n-per", gen.n_per, "Samples per class");
  gen_cmd->add_option("--d", gen.blobs.d, "Feature dimension (blobs)");
  gen_cmd->add_option("--spread", gen.blobs.center_spread, "Center coordinate range (blobs)");
  gen_cmd->add_option("--sigma", gen.blobs.sigma, "Within-class standard deviation (blobs)");
  gen_cmd->add_option("--radius-gap", gen.rings.radius_gap, "Distance between rings (rings)");
  gen_cmd->add_option("--noise", gen.rings.noise, "Radial noise (rings)");
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");

  std::string config, out, model_path, data_path, sweep;
  std::vector<std::string> ablate;
  bool verbose = false;
  const std::vector<std::string> ablation_names{"disable_af", "disable_ap", "disable_cr"};

  auto* train_cmd = app.add_subcommand("train", "Train over run.trials seeds and write metrics/history/model");
  train_cmd->add_option("--config", config, "Run config (key=value)")->required();
  train_cmd->add_option("--out", out, "Output directory (overrides run.out_dir)");
  train_cmd->add_option("--ablate", ablate, "Disable a loss term")->check(CLI::IsMember(ablation_names));
  train_cmd->add_flag("-v,--verbose", verbose, "Per-epoch progress on stderr");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--model", model_path, "DRCM checkpoint")->required();
  eval_cmd->add_option("--data", data_path, "DRCD or CSV dataset (overrides the config's data source)");
  eval_cmd->add_option("--config", config, "Run config supplying preprocessing and loss settings");
  eval_cmd->add_option("--out", out, "Write metrics JSON here instead of stdout");

  auto* ablate_cmd = app.add_subcommand("ablate", "Sweep one config key and tabulate mean metrics");
  ablate_cmd->add_option("--config", config, "Run config")->required();
  ablate_cmd->add_option("--sweep", sweep, "key=v1,v2,... (e.g. batch_size=64,128,256)")->required();
  ablate_cmd->add_option("--ablate", ablate, "Disable a loss term in every run")->check(CLI::IsMember(ablation_names));
  ablate_cmd->add_option("--out", out, "CSV output path (default stdout)");
  ablate_cmd->add_flag("-v,--verbose", verbose, "Progress on stderr");

  std::size_t systems = 1000, n_max = 6;
  std::uint64_t seed = 0;
  auto* bound_cmd = app.add_subcommand("check-bound", "Randomized check of the MI contrastive lower bound");
  bound_cmd->add_option("--systems", systems, "Number of random systems");
  bound_cmd->add_option("--n-max", n_max, "Largest system size")->check(CLI::PositiveNumber);
  bound_cmd->add_option("--seed", seed, "Seed");
  bound_cmd->add_option("--out", out, "CSV output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (!drc::kernels::select(kernels)) {
    std::cerr << "error: kernel variant '" << kernels << "' is not available on this machine\n";
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(gen);
    if (*train_cmd) return cmd_train(config, out, ablate, verbose);
    if (*eval_cmd) {
      if (data_path.empty() && config.empty()) {
        std::cerr << "error: eval needs --data or --config\n";
        return kExitUsage;
      }
      return cmd_eval(model_path, data_path, config, out);
    }
    if (*ablate_cmd) return cmd_ablate(config, sweep, ablate, out, verbose);
    if (*bound_cmd) return cmd_check_bound(systems, n_max, seed, out);
  } catch (const drc::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const drc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
