#pragma once

// Exact mutual information over small discrete systems and the contrastive
// lower bound MI(X, X') ≥ log N + (c0/N) Σ_i log(f_ii / Σ_t f_it).

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace drc::mi {

/// n outcomes on each side. conditional(i, j) = p(x'_j | x_i); prior(i) = p(x_i).
struct DiscreteSystem {
  std::size_t n = 0;
  std::vector<double> conditional;  // n×n row-major, row-stochastic
  std::vector<double> prior;        // length n

  double cond(std::size_t i, std::size_t j) const { return conditional[i * n + j]; }

  /// Uniform prior over the rows of a row-stochastic matrix.
  static DiscreteSystem with_uniform_prior(std::vector<double> conditional, std::size_t n);
};

/// Throws ContractError unless rows and prior are distributions within 1e-12.
void validate(const DiscreteSystem& sys);

/// p(x'_j) = Σ_i prior_i · conditional_ij.
std::vector<double> output_marginal(const DiscreteSystem& sys);

/// p(x_i, x'_j) row-major.
std::vector<double> joint(const DiscreteSystem& sys);

/// Σ joint log(joint / (row marginal · column marginal)), 0·log 0 = 0.
double mi_from_joint(std::span<const double> joint, std::size_t rows, std::size_t cols);

double mi_exact(const DiscreteSystem& sys);

/// Shannon entropy in nats of a distribution.
double entropy(std::span<const double> dist);

/// f_ij = per_row_scale_i · p(x'_j | x_i) / p(x'_j); entries with p(x'_j) = 0 are 0.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> f;
  std::vector<double> per_row_scale;

  double at(std::size_t i, std::size_t j) const { return f[i * n + j]; }
};

KernelMatrix make_kernel(const DiscreteSystem& sys, std::span<const double> scales);
KernelMatrix make_kernel(const DiscreteSystem& sys);

/// min_i p(x'_i | x_i), the tightest constant the hypothesis admits.
double default_c0(const DiscreteSystem& sys);

/// log n + (c0/n) Σ_i log(f_ii / Σ_t f_it). Requires 0 < c0 ≤ min_i p(x'_i | x_i).
double theorem1_bound(const DiscreteSystem& sys, const KernelMatrix& kernel, double c0);

/// -(1/n) Σ_i log(f_ii / Σ_t f_it) on an arbitrary positive-diagonal kernel.
double kernel_contrastive_loss(const KernelMatrix& kernel);

struct BoundVsLoss {
  double loss;
  double bound;  // log n - c0 · loss
};
BoundVsLoss bound_vs_loss(const DiscreteSystem& sys, const KernelMatrix& kernel, double c0);

/// Row-stochastic n×n system with Dirichlet(1) rows and a uniform prior.
DiscreteSystem random_system(std::mt19937_64& rng, std::size_t n);

struct BoundCheckRow {
  std::size_t index;
  std::size_t n;
  double c0;
  double mi;
  double bound;
  double gap;            // mi - bound
  double rescale_delta;  // |bound(random row scales) - bound(unit scales)|
};

struct BoundCheckSummary {
  std::vector<BoundCheckRow> rows;
  std::size_t violations = 0;          // gap < -tolerance
  std::size_t rescale_failures = 0;    // rescale_delta > 1e-10
  double worst_gap = 0.0;
};

inline constexpr double kBoundTolerance = 1e-9;
inline constexpr double kRescaleTolerance = 1e-10;

/// Draws `systems` random systems with n uniform in [1, n_max] and checks the bound on each.
BoundCheckSummary check_bound(std::size_t systems, std::size_t n_max, std::uint64_t seed);

}  // namespace drc::mi
