#include "drc/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include "drc/error.hpp"
#include "drc/losses.hpp"

namespace drc {

void validate(const TrainConfig& cfg, std::size_t dataset_size) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ParameterError(std::string(name) + " must be positive, got " + std::to_string(v));
    }
  };
  if (cfg.k < 2) throw ParameterError("k must be at least 2, got " + std::to_string(cfg.k));
  positive(cfg.lr, "lr");
  positive(cfg.t_af, "t_af");
  positive(cfg.t_ap, "t_ap");
  positive(cfg.eps, "eps");
  if (!(cfg.lambda >= 0.0) || !std::isfinite(cfg.lambda)) throw ParameterError("lambda must be >= 0");
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ParameterError("adam betas must lie in [0, 1)");
  }
  if (cfg.batch_size == 0) throw ParameterError("batch_size must be positive");
  if (cfg.views_per_sample < 2) throw ParameterError("views_per_sample must be at least 2");
  if (dataset_size > 0 && cfg.batch_size > dataset_size) {
    throw ParameterError("batch_size " + std::to_string(cfg.batch_size) + " exceeds dataset size " +
                         std::to_string(dataset_size));
  }
}

void adam_step(std::span<const std::span<double>> params, std::span<const std::span<const double>> grads,
               AdamState& state, const TrainConfig& cfg) {
  if (params.size() != grads.size()) {
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("adam_step: state does not match parameters");
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto p = params[i];
    const auto g = grads[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != p.size() || (!g.empty() && g.size() != p.size())) {
      throw DimensionError("adam_step: shape mismatch in parameter " + std::to_string(i));
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j];
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * gj;
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * gj * gj;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void adam_step(ClusterModel& model, AdamState& state, const TrainConfig& cfg) {
  auto tensors = model.parameters();
  std::vector<std::span<double>> params;
  std::vector<std::span<const double>> grads;
  for (auto& t : tensors) {
    params.push_back(t.mutable_data());
    grads.push_back(t.grad());
  }
  adam_step(params, grads, state, cfg);
}

double Evaluation::max_cluster_share() const {
  if (labels.empty()) return 0.0;
  const std::size_t biggest = *std::max_element(cluster_sizes.begin(), cluster_sizes.end());
  return static_cast<double>(biggest) / static_cast<double>(labels.size());
}

Evaluation evaluate(const ClusterModel& model, const Dataset& ds) {
  const ClusterModel frozen(
      [&] {
        std::vector<Tensor> w;
        for (std::size_t l = 0; l < model.layer_count(); ++l) w.push_back(model.weight(l).detach());
        return w;
      }(),
      [&] {
        std::vector<Tensor> b;
        for (std::size_t l = 0; l < model.layer_count(); ++l) b.push_back(model.bias(l).detach());
        return b;
      }());
  auto out = frozen.forward(ds.x.detach());
  Evaluation ev;
  ev.labels = argmax_rows(out.p);
  ev.cluster_sizes = cluster_histogram(ev.labels, model.k());
  if (ds.labeled()) {
    const auto& truth = *ds.y;
    const std::size_t k = std::max(model.k(), ds.k_true);
    ev.acc = acc(ev.labels, truth, k);
    ev.nmi = nmi(ev.labels, truth);
    ev.ari = ari(ev.labels, truth);
    ev.variance = variance_report(out.p, truth);
  }
  ev.z = std::move(out.z);
  ev.p = std::move(out.p);
  return ev;
}

std::size_t steps_per_epoch(std::size_t dataset_size, std::size_t batch_size) {
  return batch_size == 0 ? 0 : dataset_size / batch_size;
}

namespace {

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  const std::size_t d = x.cols();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (std::size_t r : rows) {
    const auto src = x.row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return Tensor({rows.size(), d}, std::move(out));
}

bool all_finite(const ClusterModel& model) {
  for (const auto& t : model.parameters()) {
    for (double v : t.data()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace

TrainResult train(const ClusterModel& initial, const Dataset& ds, const TrainConfig& cfg,
                  const AugmentSpec& augment, std::ostream* log) {
  validate(ds);
  validate(cfg, ds.size());
  validate(augment);
  if (initial.k() != cfg.k) {
    throw ParameterError("model emits " + std::to_string(initial.k()) + " clusters but k = " +
                         std::to_string(cfg.k));
  }
  if (initial.input_dim() != ds.dim()) {
    throw DimensionError("model expects " + std::to_string(initial.input_dim()) + " features, dataset has " +
                         std::to_string(ds.dim()));
  }

  TrainResult result{initial.clone(), {}};
  ClusterModel& model = result.model;
  AdamState adam;
  std::mt19937_64 shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t steps = steps_per_epoch(ds.size(), cfg.batch_size);
  const std::size_t extra_views = cfg.views_per_sample - 1;
  std::uint64_t global_step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher–Yates on raw engine output keeps the permutation library-independent.
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng() % (i + 1)]);
    }
    EpochRecord record;
    record.epoch = epoch;
    for (std::size_t b = 0; b < steps; ++b, ++global_step) {
      const std::span<const std::size_t> idx(order.data() + b * cfg.batch_size, cfg.batch_size);
      const Tensor xb = gather_rows(ds.x, idx);
      const auto orig = model.forward(xb);

      Tensor total;
      double af = 0.0, ap = 0.0, cr = 0.0;
      try {
        for (std::size_t v = 0; v < extra_views; ++v) {
          const Tensor xa = augment_batch(xb, augment, global_step * extra_views + v, idx);
          const auto aug = model.forward(xa);
          LossBreakdown loss = total_loss(orig.z, aug.z, orig.p, aug.p, cfg);
          af += loss.af.item();
          ap += loss.ap.item();
          cr += loss.cr.item();
          total = total.defined() ? add(total, loss.total) : loss.total;
        }
      } catch (const ContractError& e) {
        throw InvariantError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) + ": " + e.what());
      }
      const double inv_views = 1.0 / static_cast<double>(extra_views);
      if (extra_views > 1) total = mul_scalar(total, inv_views);
      backward(total);
      adam_step(model, adam, cfg);
      for (auto& p : model.parameters()) p.zero_grad();
      if (!all_finite(model)) {
        throw InvariantError("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) +
                             ": non-finite parameter after update");
      }
      record.af += af * inv_views;
      record.ap += ap * inv_views;
      record.cr += cr * inv_views;
      record.total += total.item();
    }
    if (steps > 0) {
      const double inv = 1.0 / static_cast<double>(steps);
      record.af *= inv;
      record.ap *= inv;
      record.cr *= inv;
      record.total *= inv;
    }
    const Evaluation ev = evaluate(model, ds);
    record.acc = ev.acc;
    record.nmi = ev.nmi;
    record.ari = ev.ari;
    record.cluster_sizes = ev.cluster_sizes;
    if (log) {
      *log << "epoch " << epoch << " total " << record.total << " af " << record.af << " ap " << record.ap
           << " cr " << record.cr;
      if (record.acc) *log << " acc " << *record.acc << " nmi " << *record.nmi << " ari " << *record.ari;
      *log << '\n';
    }
    result.history.epochs.push_back(std::move(record));
  }
  return result;
}

}  // namespace drc
