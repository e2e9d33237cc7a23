#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "doctest.h"
#include "drc/kernels.hpp"

using drc::kernels::KernelTable;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// Tolerance for reductions whose summation order differs between variants.
double reduction_tol(std::span<const double> a, std::span<const double> b) {
  double mag = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mag += std::abs(a[i] * (b.empty() ? 1.0 : b[i]));
  return 1e-14 * (mag + 1.0);
}

const KernelTable* avx2_or_skip() {
  const KernelTable* t = drc::kernels::avx2_kernels();
  if (!t || !drc::kernels::cpu_supports_avx2()) {
    MESSAGE("AVX2 kernels unavailable on this build/CPU; equivalence checks skipped");
    return nullptr;
  }
  return t;
}

}  // namespace

TEST_CASE("dispatch honours explicit selection") {
  CHECK(drc::kernels::select("scalar"));
  CHECK(drc::kernels::active().name == "scalar");
  CHECK_FALSE(drc::kernels::select("sse9"));
  CHECK(drc::kernels::active().name == "scalar");
  CHECK(drc::kernels::select("auto"));
  if (drc::kernels::avx2_kernels() && drc::kernels::cpu_supports_avx2()) {
    CHECK(drc::kernels::active().name == "avx2");
  } else {
    CHECK(drc::kernels::active().name == "scalar");
  }
}

TEST_CASE("scalar reference kernels on small fixtures") {
  const KernelTable& s = drc::kernels::scalar_kernels();
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  CHECK(s.dot(a, b, 3) == 12.0);
  CHECK(s.sum(b, 3) == 5.0);
  CHECK(s.max(b, 3) == 6.0);
  double out[3];
  s.relu(b, out, 3);
  CHECK(out[0] == 4.0);
  CHECK(out[1] == 0.0);
  // [[1,2],[3,4]] · [[1],[1]] = [[3],[7]]
  const double m[] = {1, 2, 3, 4};
  const double ones[] = {1, 1};
  double c[2] = {0, 0};
  s.gemm_nn(m, ones, c, 2, 2, 1);
  CHECK(c[0] == 3.0);
  CHECK(c[1] == 7.0);
}

TEST_CASE("AVX2 elementwise kernels match the scalar reference bit for bit") {
  const KernelTable* v = avx2_or_skip();
  if (!v) return;
  const KernelTable& s = drc::kernels::scalar_kernels();
  std::mt19937_64 rng(7);
  for (std::size_t n = 1; n <= 37; ++n) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    a[0] = -0.0;
    std::vector<double> r1(n), r2(n);
    s.add(a.data(), b.data(), r1.data(), n);
    v->add(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.sub(a.data(), b.data(), r1.data(), n);
    v->sub(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.mul(a.data(), b.data(), r1.data(), n);
    v->mul(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.scale(0.37, a.data(), r1.data(), n);
    v->scale(0.37, a.data(), r2.data(), n);
    CHECK(r1 == r2);
    s.relu(a.data(), r1.data(), n);
    v->relu(a.data(), r2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::signbit(r1[i]) == std::signbit(r2[i]));
      CHECK(r1[i] == r2[i]);
    }
    std::vector<double> g1 = b, g2 = b;
    s.relu_backward(a.data(), b.data(), g1.data(), n);
    v->relu_backward(a.data(), b.data(), g2.data(), n);
    CHECK(g1 == g2);
    CHECK(s.max(a.data(), n) == v->max(a.data(), n));
  }
}

TEST_CASE("AVX2 reductions and GEMM agree with the scalar reference") {
  const KernelTable* v = avx2_or_skip();
  if (!v) return;
  const KernelTable& s = drc::kernels::scalar_kernels();
  std::mt19937_64 rng(11);
  for (std::size_t n = 0; n <= 67; ++n) {
    const auto a = random_vec(rng, n), b = random_vec(rng, n);
    CHECK(std::abs(s.dot(a.data(), b.data(), n) - v->dot(a.data(), b.data(), n)) <= reduction_tol(a, b));
    CHECK(std::abs(s.sum(a.data(), n) - v->sum(a.data(), n)) <= reduction_tol(a, {}));
    std::vector<double> y1 = b, y2 = b;
    s.axpy(-1.3, a.data(), y1.data(), n);
    v->axpy(-1.3, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
  }
  const std::size_t shapes[][3] = {{1, 1, 1}, {3, 4, 2}, {5, 7, 9}, {8, 16, 64}, {13, 5, 3}, {33, 17, 6}};
  for (const auto& sh : shapes) {
    const std::size_t m = sh[0], k = sh[1], n = sh[2];
    const auto a = random_vec(rng, m * k), b = random_vec(rng, k * n), bt = random_vec(rng, n * k);
    const auto at = random_vec(rng, k * m);
    auto close = [&](const std::vector<double>& x, const std::vector<double>& y) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - y[i]) > 1e-13 * static_cast<double>(k + 1)) return false;
      }
      return true;
    };
    std::vector<double> c1(m * n, 0.5), c2(m * n, 0.5);
    s.gemm_nn(a.data(), b.data(), c1.data(), m, k, n);
    v->gemm_nn(a.data(), b.data(), c2.data(), m, k, n);
    CHECK(close(c1, c2));
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    s.gemm_nt(a.data(), bt.data(), c1.data(), m, k, n);
    v->gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
    CHECK(close(c1, c2));
    std::fill(c1.begin(), c1.end(), 0.0);
    std::fill(c2.begin(), c2.end(), 0.0);
    s.gemm_tn(at.data(), b.data(), c1.data(), m, k, n);
    v->gemm_tn(at.data(), b.data(), c2.data(), m, k, n);
    CHECK(close(c1, c2));
  }
}

TEST_CASE("GEMM variants agree with a naive triple loop") {
  std::mt19937_64 rng(3);
  const std::size_t m = 4, k = 6, n = 5;
  const auto a = random_vec(rng, m * k), b = random_vec(rng, k * n);
  std::vector<double> expect(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t p = 0; p < k; ++p) expect[i * n + j] += a[i * k + p] * b[p * n + j];
  // Transposed copies to drive the nt/tn entry points.
  std::vector<double> bt(n * k), at(k * m);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
    for (std::size_t i = 0; i < m; ++i) at[p * m + i] = a[i * k + p];
  }
  std::vector<const KernelTable*> tables{&drc::kernels::scalar_kernels()};
  if (drc::kernels::avx2_kernels() && drc::kernels::cpu_supports_avx2()) tables.push_back(drc::kernels::avx2_kernels());
  for (const KernelTable* t : tables) {
    CAPTURE(t->name);
    std::vector<double> c1(m * n, 0.0), c2(m * n, 0.0), c3(m * n, 0.0);
    t->gemm_nn(a.data(), b.data(), c1.data(), m, k, n);
    t->gemm_nt(a.data(), bt.data(), c2.data(), m, k, n);
    t->gemm_tn(at.data(), b.data(), c3.data(), m, k, n);
    for (std::size_t i = 0; i < m * n; ++i) {
      CHECK(c1[i] == doctest::Approx(expect[i]).epsilon(1e-12));
      CHECK(c2[i] == doctest::Approx(expect[i]).epsilon(1e-12));
      CHECK(c3[i] == doctest::Approx(expect[i]).epsilon(1e-12));
    }
  }
}
