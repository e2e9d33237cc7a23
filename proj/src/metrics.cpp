#include "drc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "drc/error.hpp"

namespace drc {

// Shortest augmenting path with row/column potentials, O(n³).
std::vector<int> hungarian(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) {
    throw DimensionError("hungarian: expected a square " + std::to_string(n) + "x" + std::to_string(n) +
                         " cost matrix, got " + std::to_string(cost.size()) + " entries");
  }
  for (double c : cost) {
    if (!std::isfinite(c)) throw DomainError("hungarian: cost matrix has a non-finite entry");
  }
  if (n == 0) return {};
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(r0 - 1) * n + (j - 1)] - u[r0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = static_cast<int>(j - 1);
  return assignment;
}

std::vector<std::size_t> ContingencyTable::pred_sizes() const {
  std::vector<std::size_t> out(k_pred, 0);
  for (std::size_t i = 0; i < k_pred; ++i) {
    for (std::size_t j = 0; j < k_true; ++j) out[i] += at(i, j);
  }
  return out;
}

std::vector<std::size_t> ContingencyTable::true_sizes() const {
  std::vector<std::size_t> out(k_true, 0);
  for (std::size_t i = 0; i < k_pred; ++i) {
    for (std::size_t j = 0; j < k_true; ++j) out[j] += at(i, j);
  }
  return out;
}

namespace {

void check_labels(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw DimensionError("label vectors differ in length: " + std::to_string(pred.size()) + " vs " +
                         std::to_string(truth.size()));
  }
  if (pred.empty()) throw DimensionError("empty label vectors");
  auto negative = [](int v) { return v < 0; };
  if (std::any_of(pred.begin(), pred.end(), negative) || std::any_of(truth.begin(), truth.end(), negative)) {
    throw DomainError("labels must be nonnegative");
  }
}

double comb2(std::size_t x) { return x < 2 ? 0.0 : 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

double entropy(const std::vector<std::size_t>& sizes, double n) {
  double h = 0.0;
  for (std::size_t s : sizes) {
    if (s == 0) continue;
    const double q = static_cast<double>(s) / n;
    h -= q * std::log(q);
  }
  return h;
}

}  // namespace

ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth) {
  check_labels(pred, truth);
  ContingencyTable t;
  t.k_pred = static_cast<std::size_t>(*std::max_element(pred.begin(), pred.end())) + 1;
  t.k_true = static_cast<std::size_t>(*std::max_element(truth.begin(), truth.end())) + 1;
  t.counts.assign(t.k_pred * t.k_true, 0);
  t.n = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) ++t.counts[pred[i] * t.k_true + truth[i]];
  return t;
}

double acc(std::span<const int> pred, std::span<const int> truth, std::size_t k) {
  check_labels(pred, truth);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (static_cast<std::size_t>(pred[i]) >= k || static_cast<std::size_t>(truth[i]) >= k) {
      throw DomainError("acc: label at index " + std::to_string(i) + " outside [0, " + std::to_string(k) + ")");
    }
  }
  std::vector<double> cost(k * k, 0.0);
  for (std::size_t i = 0; i < pred.size(); ++i) cost[pred[i] * k + truth[i]] -= 1.0;
  const auto assignment = hungarian(cost, k);
  double matched = 0.0;
  for (std::size_t r = 0; r < k; ++r) matched -= cost[r * k + assignment[r]];
  return matched / static_cast<double>(pred.size());
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  const ContingencyTable t = contingency(pred, truth);
  const double n = static_cast<double>(t.n);
  const auto a = t.pred_sizes();
  const auto b = t.true_sizes();
  const double ha = entropy(a, n), hb = entropy(b, n);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < t.k_pred; ++i) {
    for (std::size_t j = 0; j < t.k_true; ++j) {
      const std::size_t c = t.at(i, j);
      if (c == 0) continue;
      const double pij = static_cast<double>(c) / n;
      mi += pij * std::log(static_cast<double>(c) * n / (static_cast<double>(a[i]) * static_cast<double>(b[j])));
    }
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double ari(std::span<const int> pred, std::span<const int> truth) {
  const ContingencyTable t = contingency(pred, truth);
  double index = 0.0;
  for (std::size_t c : t.counts) index += comb2(c);
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t s : t.pred_sizes()) sum_a += comb2(s);
  for (std::size_t s : t.true_sizes()) sum_b += comb2(s);
  const double total = comb2(t.n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 0.0;
  return (index - expected) / denom;
}

std::vector<std::size_t> cluster_histogram(std::span<const int> pred, std::size_t k) {
  std::vector<std::size_t> h(k, 0);
  for (int label : pred) {
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw DomainError("cluster_histogram: label " + std::to_string(label) + " outside [0, " +
                        std::to_string(k) + ")");
    }
    ++h[label];
  }
  return h;
}

VarianceReport variance_report(const Tensor& p, std::span<const int> truth) {
  if (truth.size() != p.rows()) {
    throw DimensionError("variance_report: " + std::to_string(truth.size()) + " labels for " +
                         std::to_string(p.rows()) + " rows");
  }
  if (truth.empty()) throw DimensionError("variance_report: empty input");
  if (std::any_of(truth.begin(), truth.end(), [](int v) { return v < 0; })) {
    throw DomainError("variance_report: labels must be nonnegative");
  }
  const std::size_t n = p.rows(), k = p.cols();
  const std::size_t classes = static_cast<std::size_t>(*std::max_element(truth.begin(), truth.end())) + 1;

  std::vector<double> centroid(classes * k, 0.0), global(k, 0.0);
  std::vector<std::size_t> count(classes, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++count[truth[i]];
    for (std::size_t j = 0; j < k; ++j) {
      centroid[truth[i] * k + j] += p(i, j);
      global[j] += p(i, j);
    }
  }
  for (double& g : global) g /= static_cast<double>(n);

  VarianceReport report;
  report.intra.assign(classes, std::numeric_limits<double>::quiet_NaN());
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (count[c] == 0) {
      report.skipped_classes.push_back(static_cast<int>(c));
      continue;
    }
    ++present;
    double d2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      centroid[c * k + j] /= static_cast<double>(count[c]);
      d2 += (centroid[c * k + j] - global[j]) * (centroid[c * k + j] - global[j]);
    }
    report.inter += d2;
    report.intra[c] = 0.0;
  }
  report.inter /= static_cast<double>(present);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = truth[i];
    double d2 = 0.0;
    for (std::size_t j = 0; j < k; ++j) d2 += (p(i, j) - centroid[c * k + j]) * (p(i, j) - centroid[c * k + j]);
    report.intra[c] += d2;
  }
  for (std::size_t c = 0; c < classes; ++c) {
    if (count[c] > 0) report.intra[c] /= static_cast<double>(count[c]);
  }
  return report;
}

}  // namespace drc
