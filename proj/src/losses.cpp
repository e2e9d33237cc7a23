#include "drc/losses.hpp"

#include <cmath>
#include <string>

#include "drc/error.hpp"

namespace drc {

void check_row_simplex(const Tensor& p, const char* what) {
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double total = 0.0;
    for (double v : p.row(r)) {
      if (!(v >= 0.0)) {
        throw ContractError(std::string(what) + ": row " + std::to_string(r) +
                            " has a negative or non-finite entry");
      }
      total += v;
    }
    if (!(std::abs(total - 1.0) <= kSimplexTolerance)) {
      throw ContractError(std::string(what) + ": row " + std::to_string(r) + " sums to " +
                          std::to_string(total) + ", not 1");
    }
  }
}

Tensor info_nce(const Tensor& scores, double temperature) {
  if (scores.rows() != scores.cols()) {
    throw DimensionError("info_nce: score matrix must be square, got " + to_string(scores.shape()));
  }
  if (!(temperature > 0.0)) {
    throw ParameterError("info_nce: temperature must be positive, got " + std::to_string(temperature));
  }
  const auto n = static_cast<double>(scores.rows());
  Tensor log_share = diagonal(log_softmax_rows(mul_scalar(scores, 1.0 / temperature)));
  return mul_scalar(sum_all(log_share), -1.0 / n);
}

Tensor af_loss(const Tensor& z, const Tensor& z_aug, double temperature, bool normalize) {
  if (z.shape() != z_aug.shape()) {
    throw DimensionError("af_loss: z " + to_string(z.shape()) + " vs z_aug " +
                         to_string(z_aug.shape()));
  }
  const Tensor a = normalize ? l2_normalize_rows(z) : z;
  const Tensor b = normalize ? l2_normalize_rows(z_aug) : z_aug;
  return info_nce(matmul(a, transpose(b)), temperature);
}

Tensor ap_loss(const Tensor& p, const Tensor& p_aug, double temperature) {
  if (p.shape() != p_aug.shape()) {
    throw DimensionError("ap_loss: p " + to_string(p.shape()) + " vs p_aug " +
                         to_string(p_aug.shape()));
  }
  check_row_simplex(p, "ap_loss(p)");
  check_row_simplex(p_aug, "ap_loss(p_aug)");
  // pᵀ·p_aug is K×K with entry (i, j) = q_i · q'_j.
  return info_nce(matmul(transpose(p), p_aug), temperature);
}

Tensor cr_loss(const Tensor& p) {
  check_row_simplex(p, "cr_loss");
  const auto n = static_cast<double>(p.rows());
  return mul_scalar(sum_all(square(sum_cols(p))), 1.0 / n);
}

LossBreakdown total_loss(const Tensor& z, const Tensor& z_aug, const Tensor& p,
                         const Tensor& p_aug, const TrainConfig& cfg) {
  LossBreakdown out;
  out.lambda = cfg.lambda;
  out.af = cfg.disable_af ? Tensor::scalar(0.0) : af_loss(z, z_aug, cfg.t_af, cfg.normalize_af);
  out.ap = cfg.disable_ap ? Tensor::scalar(0.0) : ap_loss(p, p_aug, cfg.t_ap);
  out.cr = cfg.disable_cr ? Tensor::scalar(0.0) : cr_loss(p);
  out.total = add(add(out.af, out.ap), mul_scalar(out.cr, cfg.lambda));
  return out;
}

}  // namespace drc
