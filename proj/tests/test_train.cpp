#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "drc/data.hpp"
#include "drc/error.hpp"
#include "drc/train.hpp"

using drc::AdamState;
using drc::TrainConfig;

namespace {

drc::Dataset small_blobs(std::uint64_t seed = 0, std::size_t n_per = 40) {
  drc::BlobsParams params;
  params.k = 3;
  params.n_per = n_per;
  params.d = 5;
  params.seed = seed;
  return drc::gen_blobs(params);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.k = 3;
  cfg.batch_size = 32;
  cfg.epochs = 3;
  cfg.lr = 1e-3;
  return cfg;
}

drc::ClusterModel small_model(std::uint64_t seed = 0) {
  return drc::ClusterModel::init(std::vector<std::size_t>{5, 8, 3}, seed);
}

bool same_parameters(const drc::ClusterModel& a, const drc::ClusterModel& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!std::equal(pa[i].data().begin(), pa[i].data().end(), pb[i].data().begin())) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("adam leaves parameters unchanged under zero gradients") {
  std::vector<double> p{1.0, -2.0, 3.5};
  const std::vector<double> before = p;
  std::vector<double> g(3, 0.0);
  std::vector<std::span<double>> params{p};
  std::vector<std::span<const double>> grads{g};
  AdamState state;
  const TrainConfig cfg;
  for (int i = 0; i < 5; ++i) drc::adam_step(params, grads, state, cfg);
  CHECK(p == before);
  CHECK(state.t == 5);

  std::vector<std::span<const double>> none{std::span<const double>{}};
  drc::adam_step(params, none, state, cfg);
  CHECK(p == before);
}

TEST_CASE("adam first step moves each coordinate by about lr against the gradient sign") {
  std::vector<double> p{0.0, 1.0, -1.0};
  std::vector<double> g{0.3, -7.0, 1e-3};
  std::vector<std::span<double>> params{p};
  std::vector<std::span<const double>> grads{g};
  AdamState state;
  const TrainConfig cfg;
  drc::adam_step(params, grads, state, cfg);
  CHECK(std::abs(p[0] - (0.0 - 1e-4)) <= 1e-6);
  CHECK(std::abs(p[1] - (1.0 + 1e-4)) <= 1e-6);
  CHECK(std::abs(p[2] - (-1.0 - 1e-4)) <= 1e-6);
}

TEST_CASE("adam matches a hand-rolled second step") {
  const TrainConfig cfg;
  std::vector<double> p{0.5};
  std::vector<std::span<double>> params{p};
  AdamState state;
  const double g1 = 0.2, g2 = -0.1;
  std::vector<double> ga{g1}, gb{g2};
  drc::adam_step(params, std::vector<std::span<const double>>{ga}, state, cfg);
  drc::adam_step(params, std::vector<std::span<const double>>{gb}, state, cfg);

  double theta = 0.5, m = 0, v = 0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? g1 : g2;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    theta -= 1e-4 * mh / (std::sqrt(vh) + 1e-8);
  }
  CHECK(p[0] == doctest::Approx(theta).epsilon(1e-14));
}

TEST_CASE("adam trajectories are deterministic") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> sequence(50, std::vector<double>(6));
  for (auto& g : sequence)
    for (double& v : g) v = normal(rng);
  auto run = [&] {
    std::vector<double> p(6, 0.25);
    std::vector<std::span<double>> params{p};
    AdamState state;
    for (const auto& g : sequence) drc::adam_step(params, std::vector<std::span<const double>>{g}, state, TrainConfig{});
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("adam shape mismatch") {
  std::vector<double> p(3), g(2);
  std::vector<std::span<double>> params{p};
  AdamState state;
  CHECK_THROWS_AS(drc::adam_step(params, std::vector<std::span<const double>>{g}, state, TrainConfig{}),
                  drc::DimensionError);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(drc::validate(cfg));
  cfg.k = 1;
  CHECK_THROWS_AS(drc::validate(cfg), drc::ParameterError);
  cfg = {};
  cfg.t_af = 0;
  CHECK_THROWS_AS(drc::validate(cfg), drc::ParameterError);
  cfg = {};
  cfg.views_per_sample = 1;
  CHECK_THROWS_AS(drc::validate(cfg), drc::ParameterError);
  cfg = {};
  CHECK_THROWS_AS(drc::validate(cfg, 100), drc::ParameterError);
  CHECK_NOTHROW(drc::validate(cfg, 256));
}

TEST_CASE("steps per epoch drop the partial batch") {
  CHECK(drc::steps_per_epoch(2000, 256) == 7);
  CHECK(drc::steps_per_epoch(256, 256) == 1);
  CHECK(drc::steps_per_epoch(511, 256) == 1);
}

TEST_CASE("zero epochs returns the model unchanged with empty history") {
  const auto ds = small_blobs();
  const auto model = small_model();
  auto cfg = small_config();
  cfg.epochs = 0;
  const auto result = drc::train(model, ds, cfg, drc::AugmentSpec{});
  CHECK(result.history.epochs.empty());
  CHECK(same_parameters(result.model, model));
}

TEST_CASE("training does not modify its input and is deterministic") {
  const auto ds = small_blobs();
  const auto model = small_model(3);
  const auto snapshot = model.clone();
  const auto cfg = small_config();
  drc::AugmentSpec aug;
  aug.seed = 5;
  const auto a = drc::train(model, ds, cfg, aug);
  const auto b = drc::train(model, ds, cfg, aug);
  CHECK(same_parameters(model, snapshot));
  CHECK(same_parameters(a.model, b.model));
  CHECK_FALSE(same_parameters(a.model, model));
  REQUIRE(a.history.epochs.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    const auto& r = a.history.epochs[e];
    CHECK(r.epoch == e + 1);
    CHECK(r.total == b.history.epochs[e].total);
    CHECK(r.acc.has_value());
    std::size_t total = 0;
    for (auto s : r.cluster_sizes) total += s;
    CHECK(total == ds.size());
    CHECK(std::abs(r.total - (r.af + r.ap + cfg.lambda * r.cr)) <= 1e-9);
  }

  auto other = cfg;
  other.seed = 1;
  CHECK_FALSE(same_parameters(drc::train(model, ds, other, aug).model, a.model));
}

TEST_CASE("additional views average the loss") {
  const auto ds = small_blobs();
  auto cfg = small_config();
  cfg.epochs = 1;
  cfg.views_per_sample = 3;
  const auto r = drc::train(small_model(), ds, cfg, drc::AugmentSpec{});
  REQUIRE(r.history.epochs.size() == 1);
  const auto& e = r.history.epochs[0];
  CHECK(std::abs(e.total - (e.af + e.ap + cfg.lambda * e.cr)) <= 1e-9);
}

TEST_CASE("unlabeled data trains with losses only") {
  auto ds = small_blobs();
  ds.y.reset();
  ds.k_true = 0;
  const auto r = drc::train(small_model(), ds, small_config(), drc::AugmentSpec{});
  CHECK_FALSE(r.history.epochs.back().acc.has_value());
}

TEST_CASE("train rejects inconsistent inputs") {
  const auto ds = small_blobs();
  auto cfg = small_config();
  cfg.k = 1;
  CHECK_THROWS_AS(drc::train(small_model(), ds, cfg, drc::AugmentSpec{}), drc::ParameterError);
  cfg = small_config();
  cfg.k = 4;
  CHECK_THROWS_AS(drc::train(small_model(), ds, cfg, drc::AugmentSpec{}), drc::ParameterError);
  cfg = small_config();
  cfg.batch_size = 1000;
  CHECK_THROWS_AS(drc::train(small_model(), ds, cfg, drc::AugmentSpec{}), drc::ParameterError);
  CHECK_THROWS_AS(drc::train(drc::ClusterModel::init(std::vector<std::size_t>{4, 3}, 0), ds, small_config(),
                             drc::AugmentSpec{}),
                  drc::DimensionError);
}

TEST_CASE("blowing up the parameters aborts with the epoch and batch") {
  const auto ds = small_blobs();
  auto cfg = small_config();
  cfg.lr = 1e300;
  cfg.normalize_af = false;
  try {
    drc::train(small_model(), ds, cfg, drc::AugmentSpec{});
    FAIL("expected InvariantError");
  } catch (const drc::InvariantError& e) {
    CHECK(std::string(e.what()).find("epoch 1") != std::string::npos);
  }
}

TEST_CASE("log receives one line per epoch") {
  std::ostringstream log;
  drc::train(small_model(), small_blobs(), small_config(), drc::AugmentSpec{}, &log);
  const std::string text = log.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text.find("acc") != std::string::npos);
}

TEST_CASE("without cluster regularization the total loss falls over the first ten epochs") {
  drc::BlobsParams params;  // k=4, n_per=500, d=16
  int decreasing = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    params.seed = seed;
    const auto ds = drc::gen_blobs(params);
    TrainConfig cfg;
    cfg.k = 4;
    cfg.lambda = 0.0;
    cfg.epochs = 10;
    cfg.seed = seed;
    drc::AugmentSpec aug;
    aug.seed = seed;
    aug.feature_scale = drc::feature_std(ds.x);
    const auto r = drc::train(drc::ClusterModel::init(std::vector<std::size_t>{16, 64, 4}, seed), ds, cfg, aug);
    REQUIRE(r.history.epochs.size() == 10);
    if (r.history.epochs.back().total < r.history.epochs.front().total) ++decreasing;
  }
  CHECK(decreasing >= 4);
}

TEST_CASE("evaluate reports metrics, histogram and variance") {
  const auto ds = small_blobs();
  const auto ev = drc::evaluate(small_model(), ds);
  CHECK(ev.labels.size() == ds.size());
  CHECK(ev.z.shape() == drc::Shape{ds.size(), 3});
  REQUIRE(ev.acc.has_value());
  CHECK(*ev.acc >= 1.0 / 3.0);
  CHECK(ev.variance.has_value());
  CHECK(ev.max_cluster_share() > 0.0);
  CHECK(ev.max_cluster_share() <= 1.0);
}
