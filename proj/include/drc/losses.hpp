#pragma once

// Contrastive objectives over assignment features and assignment probabilities.
//
// All losses use the minimization form: info_nce(s, T) is the negated mean
// log-share of each row's positive pair, so it is ≥ 0 and lower is better.

#include "drc/tensor.hpp"
#include "drc/train_config.hpp"

namespace drc {

/// Row-simplex tolerance for probability inputs.
inline constexpr double kSimplexTolerance = 1e-9;

/// -(1/N) Σ_i log( exp(s_ii/T) / Σ_j exp(s_ij/T) ) for a square score matrix.
Tensor info_nce(const Tensor& scores, double temperature);

/// Contrast of each sample's assignment feature against every augmented feature in the batch.
Tensor af_loss(const Tensor& z, const Tensor& z_aug, double temperature, bool normalize = true);

/// Contrast over cluster columns: s_ij = q_i · q'_j with q the columns of p and p_aug.
Tensor ap_loss(const Tensor& p, const Tensor& p_aug, double temperature);

/// (1/N) Σ_k (Σ_n p_nk)²; lies in [N/K, N] for row-stochastic p.
Tensor cr_loss(const Tensor& p);

struct LossBreakdown {
  Tensor af;
  Tensor ap;
  Tensor cr;
  Tensor total;  // af + ap + lambda·cr, differentiable
  double lambda = 0.0;
};

LossBreakdown total_loss(const Tensor& z, const Tensor& z_aug, const Tensor& p,
                         const Tensor& p_aug, const TrainConfig& cfg);

/// Throws ContractError unless every row is nonnegative and sums to 1 within kSimplexTolerance.
void check_row_simplex(const Tensor& p, const char* what);

}  // namespace drc
