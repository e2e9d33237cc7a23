#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "drc/error.hpp"
#include "drc/mioracle.hpp"

using namespace drc::mi;

namespace {

// H(X) + H(Y) - H(X, Y), written independently of mi_from_joint.
double mi_by_entropies(const std::vector<double>& joint, std::size_t n) {
  std::vector<double> rows(n, 0.0), cols(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      rows[i] += joint[i * n + j];
      cols[j] += joint[i * n + j];
    }
  auto h = [](const std::vector<double>& d) {
    double s = 0;
    for (double v : d)
      if (v > 0) s -= v * std::log(v);
    return s;
  };
  return h(rows) + h(cols) - h(joint);
}

DiscreteSystem symmetric_channel(double eps) {
  return DiscreteSystem::with_uniform_prior({1 - eps, eps, eps, 1 - eps}, 2);
}

}  // namespace

TEST_CASE("system validation") {
  CHECK_THROWS_AS(DiscreteSystem::with_uniform_prior({0.5, 0.6, 0.5, 0.5}, 2), drc::ContractError);
  CHECK_THROWS_AS(DiscreteSystem::with_uniform_prior({1.2, -0.2, 0.5, 0.5}, 2), drc::ContractError);
  CHECK_THROWS_AS(DiscreteSystem::with_uniform_prior({1, 0, 1}, 2), drc::ContractError);
  DiscreteSystem bad{2, {1, 0, 0, 1}, {0.7, 0.7}};
  CHECK_THROWS_AS(mi_exact(bad), drc::ContractError);
}

TEST_CASE("independent joint has zero information") {
  DiscreteSystem sys{3, {0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3}, {0.1, 0.6, 0.3}};
  CHECK(std::abs(mi_exact(sys)) <= 1e-15);
  const std::vector<double> outer{0.06, 0.14, 0.24, 0.56};
  CHECK(std::abs(mi_from_joint(outer, 2, 2)) <= 1e-15);
}

TEST_CASE("identity channel carries one bit") {
  CHECK(mi_exact(symmetric_channel(0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("mi agrees with the entropy identity and respects entropy bounds") {
  std::mt19937_64 rng(31);
  for (int draw = 0; draw < 1000; ++draw) {
    const auto sys = random_system(rng, 4);
    const double mi = mi_exact(sys);
    const auto j = joint(sys);
    CHECK(mi >= 0.0);
    CHECK(mi <= std::min(entropy(sys.prior), entropy(output_marginal(sys))) + 1e-12);
    CHECK(mi == doctest::Approx(mi_by_entropies(j, 4)).epsilon(1e-9));
  }
}

TEST_CASE("mi is symmetric under transposing the joint") {
  std::mt19937_64 rng(32);
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t n = 1 + draw % 6;
    const auto sys = random_system(rng, n);
    auto j = joint(sys);
    std::vector<double> t(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) t[b * n + a] = j[a * n + b];
    CHECK(mi_from_joint(t, n, n) == doctest::Approx(mi_from_joint(j, n, n)).epsilon(1e-12));
  }
}

TEST_CASE("kernel construction") {
  const auto sys = symmetric_channel(0.25);
  const auto k = make_kernel(sys);
  CHECK(k.at(0, 0) == doctest::Approx(0.75 / 0.5));
  CHECK(k.at(0, 1) == doctest::Approx(0.25 / 0.5));

  const std::vector<double> twos{2.0, 2.0};
  const auto doubled = make_kernel(sys, twos);
  CHECK(kernel_contrastive_loss(doubled) == doctest::Approx(kernel_contrastive_loss(k)).epsilon(1e-15));

  CHECK_THROWS_AS(make_kernel(sys, std::vector<double>{1.0, 0.0}), drc::ContractError);
  CHECK_THROWS_AS(make_kernel(sys, std::vector<double>{1.0}), drc::ContractError);

  DiscreteSystem dead{2, {1, 0, 1, 0}, {0.5, 0.5}};
  const auto kd = make_kernel(dead);
  CHECK(kd.at(0, 1) == 0.0);
}

TEST_CASE("bound is invariant to per-row kernel scales") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int draw = 0; draw < 200; ++draw) {
    const std::size_t n = 1 + draw % 6;
    const auto sys = random_system(rng, n);
    std::vector<double> scales(n);
    for (double& s : scales) s = scale(rng);
    const double c0 = default_c0(sys);
    CHECK(std::abs(theorem1_bound(sys, make_kernel(sys, scales), c0) - theorem1_bound(sys, make_kernel(sys), c0)) <=
          1e-10);
  }
}

TEST_CASE("bound fixtures") {
  const auto one = DiscreteSystem::with_uniform_prior({1.0}, 1);
  CHECK(theorem1_bound(one, make_kernel(one), 1.0) == 0.0);
  CHECK(mi_exact(one) == 0.0);

  const auto id = symmetric_channel(0.0);
  const double b = theorem1_bound(id, make_kernel(id), 1.0);
  CHECK(b == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(b <= mi_exact(id) + 1e-12);
}

TEST_CASE("c0 must satisfy the hypothesis") {
  const auto sys = symmetric_channel(0.3);
  const auto k = make_kernel(sys);
  CHECK_NOTHROW(theorem1_bound(sys, k, 0.7));
  CHECK_THROWS_AS(theorem1_bound(sys, k, 0.71), drc::ContractError);
  CHECK_THROWS_AS(theorem1_bound(sys, k, 0.0), drc::ContractError);
  const auto zero_diag = DiscreteSystem::with_uniform_prior({0, 1, 1, 0}, 2);
  CHECK_THROWS_AS(theorem1_bound(zero_diag, make_kernel(zero_diag), 0.5), drc::ContractError);
}

TEST_CASE("uniform kernel gives loss log n") {
  for (std::size_t n = 1; n <= 6; ++n) {
    KernelMatrix uniform{n, std::vector<double>(n * n, 3.0), std::vector<double>(n, 1.0)};
    const double loss = kernel_contrastive_loss(uniform);
    CHECK(loss == doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-14));
    std::vector<double> cond(n * n, 1.0 / static_cast<double>(n));
    const auto sys = DiscreteSystem::with_uniform_prior(cond, n);
    const double c0 = default_c0(sys);
    const auto r = bound_vs_loss(sys, uniform, c0);
    CHECK(r.loss == doctest::Approx(loss));
    CHECK(r.bound == doctest::Approx((1 - c0) * std::log(static_cast<double>(n))).epsilon(1e-12));
  }
}

TEST_CASE("identity-dominant kernel approaches log n") {
  const double delta = 1e-6;
  const std::size_t n = 4;
  std::vector<double> cond(n * n, delta / 3.0);
  for (std::size_t i = 0; i < n; ++i) cond[i * n + i] = 1 - delta;
  const auto sys = DiscreteSystem::with_uniform_prior(cond, n);
  const auto r = bound_vs_loss(sys, make_kernel(sys), default_c0(sys));
  CHECK(r.loss == doctest::Approx(-std::log(1 - delta)).epsilon(1e-6));
  CHECK(std::abs(r.bound - std::log(4.0)) <= 2e-6);
}

TEST_CASE("lower contrastive loss means a higher bound") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> entry(0.01, 5.0);
  for (int draw = 0; draw < 200; ++draw) {
    const std::size_t n = 2 + draw % 5;
    const auto sys = random_system(rng, n);
    const double c0 = default_c0(sys);
    KernelMatrix a{n, std::vector<double>(n * n), std::vector<double>(n, 1.0)};
    KernelMatrix b = a;
    for (double& v : a.f) v = entry(rng);
    for (double& v : b.f) v = entry(rng);
    const auto ra = bound_vs_loss(sys, a, c0), rb = bound_vs_loss(sys, b, c0);
    if (ra.loss < rb.loss) CHECK(ra.bound > rb.bound);
    if (rb.loss < ra.loss) CHECK(rb.bound > ra.bound);
  }
}

TEST_CASE("single-outcome systems meet the bound with equality") {
  const auto s = check_bound(50, 1, 3);
  CHECK(s.violations == 0);
  for (const auto& row : s.rows) {
    CHECK(row.mi == 0.0);
    CHECK(row.bound == 0.0);
    CHECK(row.gap >= 0.0);
  }
}

TEST_CASE("check_bound is deterministic") {
  const auto a = check_bound(100, 6, 5);
  const auto b = check_bound(100, 6, 5);
  REQUIRE(a.rows.size() == 100);
  CHECK(a.violations == b.violations);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(a.rows[i].gap == b.rows[i].gap);
    CHECK(a.rows[i].n >= 1);
    CHECK(a.rows[i].n <= 6);
  }
  CHECK(a.rescale_failures == 0);
  CHECK_THROWS_AS(check_bound(1, 0, 0), drc::ParameterError);
}

// With c0 at the smallest diagonal conditional, the stated bound is above the
// exact MI of a noisy binary symmetric channel: log 2 + c0·log(1-ε) vs log 2 - H(ε).
TEST_CASE("the stated bound exceeds the exact MI of a binary symmetric channel") {
  for (double eps : {0.01, 0.1, 0.25, 0.4}) {
    const auto sys = symmetric_channel(eps);
    const double c0 = default_c0(sys);
    const double bound = theorem1_bound(sys, make_kernel(sys), c0);
    const double h = -(eps * std::log(eps) + (1 - eps) * std::log(1 - eps));
    CHECK(mi_exact(sys) == doctest::Approx(std::log(2.0) - h).epsilon(1e-12));
    CHECK(bound == doctest::Approx(std::log(2.0) + (1 - eps) * std::log(1 - eps)).epsilon(1e-12));
    CHECK(bound > mi_exact(sys));
  }
}
