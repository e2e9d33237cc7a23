#include "drc/mioracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "drc/error.hpp"

namespace drc::mi {

namespace {
constexpr double kDistTolerance = 1e-12;
}

DiscreteSystem DiscreteSystem::with_uniform_prior(std::vector<double> conditional, std::size_t n) {
  DiscreteSystem sys{n, std::move(conditional), std::vector<double>(n, 1.0 / static_cast<double>(n))};
  validate(sys);
  return sys;
}

void validate(const DiscreteSystem& sys) {
  if (sys.n == 0) throw ContractError("discrete system must have n >= 1");
  if (sys.conditional.size() != sys.n * sys.n || sys.prior.size() != sys.n) {
    throw ContractError("discrete system arrays do not match n = " + std::to_string(sys.n));
  }
  auto check_dist = [](std::span<const double> d, const std::string& what) {
    double total = 0.0;
    for (double v : d) {
      if (!(v >= 0.0)) throw ContractError(what + " has a negative or non-finite entry");
      total += v;
    }
    if (std::abs(total - 1.0) > kDistTolerance) {
      throw ContractError(what + " sums to " + std::to_string(total) + ", not 1");
    }
  };
  for (std::size_t i = 0; i < sys.n; ++i) {
    check_dist(std::span<const double>(sys.conditional).subspan(i * sys.n, sys.n),
               "conditional row " + std::to_string(i));
  }
  check_dist(sys.prior, "prior");
}

std::vector<double> output_marginal(const DiscreteSystem& sys) {
  std::vector<double> m(sys.n, 0.0);
  for (std::size_t i = 0; i < sys.n; ++i) {
    for (std::size_t j = 0; j < sys.n; ++j) m[j] += sys.prior[i] * sys.cond(i, j);
  }
  return m;
}

std::vector<double> joint(const DiscreteSystem& sys) {
  std::vector<double> out(sys.n * sys.n);
  for (std::size_t i = 0; i < sys.n; ++i) {
    for (std::size_t j = 0; j < sys.n; ++j) out[i * sys.n + j] = sys.prior[i] * sys.cond(i, j);
  }
  return out;
}

double mi_from_joint(std::span<const double> joint, std::size_t rows, std::size_t cols) {
  if (joint.size() != rows * cols) throw ContractError("joint size does not match its extents");
  std::vector<double> row_m(rows, 0.0), col_m(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = joint[i * cols + j];
      if (!(v >= 0.0)) throw ContractError("joint distribution has a negative or non-finite entry");
      row_m[i] += v;
      col_m[j] += v;
    }
  }
  double mi = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = joint[i * cols + j];
      if (v > 0.0) mi += v * std::log(v / (row_m[i] * col_m[j]));
    }
  }
  return std::max(mi, 0.0);
}

double mi_exact(const DiscreteSystem& sys) {
  validate(sys);
  return mi_from_joint(joint(sys), sys.n, sys.n);
}

double entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double v : dist) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

KernelMatrix make_kernel(const DiscreteSystem& sys, std::span<const double> scales) {
  validate(sys);
  if (scales.size() != sys.n) {
    throw ContractError("make_kernel: " + std::to_string(scales.size()) + " scales for n = " +
                        std::to_string(sys.n));
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ContractError("make_kernel: scales must be positive and finite");
  }
  const auto marginal = output_marginal(sys);
  KernelMatrix k{sys.n, std::vector<double>(sys.n * sys.n, 0.0), {scales.begin(), scales.end()}};
  for (std::size_t i = 0; i < sys.n; ++i) {
    for (std::size_t j = 0; j < sys.n; ++j) {
      if (marginal[j] > 0.0) k.f[i * sys.n + j] = scales[i] * sys.cond(i, j) / marginal[j];
    }
  }
  return k;
}

KernelMatrix make_kernel(const DiscreteSystem& sys) {
  const std::vector<double> ones(sys.n, 1.0);
  return make_kernel(sys, ones);
}

double default_c0(const DiscreteSystem& sys) {
  double c0 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sys.n; ++i) c0 = std::min(c0, sys.cond(i, i));
  return c0;
}

double kernel_contrastive_loss(const KernelMatrix& kernel) {
  if (kernel.n == 0 || kernel.f.size() != kernel.n * kernel.n) {
    throw ContractError("kernel matrix is empty or malformed");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < kernel.n; ++i) {
    double row = 0.0;
    for (std::size_t t = 0; t < kernel.n; ++t) row += kernel.at(i, t);
    const double diag = kernel.at(i, i);
    if (!(diag > 0.0)) {
      throw ContractError("kernel diagonal entry " + std::to_string(i) + " is not positive");
    }
    total += std::log(diag / row);
  }
  return -total / static_cast<double>(kernel.n);
}

double theorem1_bound(const DiscreteSystem& sys, const KernelMatrix& kernel, double c0) {
  validate(sys);
  if (kernel.n != sys.n) throw ContractError("kernel and system sizes differ");
  const double min_diag = default_c0(sys);
  if (!(min_diag > 0.0)) {
    throw ContractError("theorem hypothesis unmeetable: some p(x'_i|x_i) is zero");
  }
  if (!(c0 > 0.0) || c0 > min_diag) {
    throw ContractError("c0 = " + std::to_string(c0) + " violates 0 < c0 <= min_i p(x'_i|x_i) = " +
                        std::to_string(min_diag));
  }
  return std::log(static_cast<double>(sys.n)) - c0 * kernel_contrastive_loss(kernel);
}

BoundVsLoss bound_vs_loss(const DiscreteSystem& sys, const KernelMatrix& kernel, double c0) {
  const double loss = kernel_contrastive_loss(kernel);
  return {loss, theorem1_bound(sys, kernel, c0)};
}

DiscreteSystem random_system(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> gamma1(1.0);
  std::vector<double> cond(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      // Guard the measure-zero exact-zero draw so every diagonal stays positive.
      cond[i * n + j] = std::max(gamma1(rng), 1e-300);
      total += cond[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) cond[i * n + j] /= total;
  }
  return DiscreteSystem::with_uniform_prior(std::move(cond), n);
}

BoundCheckSummary check_bound(std::size_t systems, std::size_t n_max, std::uint64_t seed) {
  if (n_max == 0) throw ParameterError("check_bound: n_max must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_n(1, n_max);
  std::uniform_real_distribution<double> pick_scale(0.1, 10.0);
  BoundCheckSummary summary;
  summary.rows.reserve(systems);
  for (std::size_t s = 0; s < systems; ++s) {
    const std::size_t n = pick_n(rng);
    const DiscreteSystem sys = random_system(rng, n);
    std::vector<double> scales(n);
    for (double& v : scales) v = pick_scale(rng);
    const double c0 = default_c0(sys);
    const double mi = mi_exact(sys);
    const double bound = theorem1_bound(sys, make_kernel(sys), c0);
    const double scaled = theorem1_bound(sys, make_kernel(sys, scales), c0);
    BoundCheckRow row{s, n, c0, mi, bound, mi - bound, std::abs(scaled - bound)};
    if (row.gap < -kBoundTolerance) ++summary.violations;
    if (row.rescale_delta > kRescaleTolerance) ++summary.rescale_failures;
    summary.worst_gap = s == 0 ? row.gap : std::min(summary.worst_gap, row.gap);
    summary.rows.push_back(row);
  }
  return summary;
}

}  // namespace drc::mi
