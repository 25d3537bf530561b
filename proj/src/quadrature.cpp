#include "trf/quadrature.hpp"

#include <map>
#include <mutex>

namespace trf::quad {

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussLegendre rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node for the weight.
    double p1 = 1.0, p2 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    dp = n * (z * p1 - p2) / (z * z - 1.0);
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = rule.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

WynnEstimate wynn_epsilon(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n == 0) return {0.0, 0.0};
  if (n < 3) return {s.back(), n > 1 ? std::abs(s[n - 1] - s[n - 2]) : 0.0};
  // eps[k] holds column k of the epsilon table for the current diagonal.
  std::vector<std::vector<double>> table(n + 1, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) table[1][i] = s[i];
  std::vector<double> even_estimates;
  for (std::size_t k = 2; k <= n; ++k) {
    for (std::size_t i = 0; i + k - 1 < n; ++i) {
      const double diff = table[k - 1][i + 1] - table[k - 1][i];
      const double prev = table[k - 2][i + 1];
      if (diff == 0.0 || !std::isfinite(diff)) {
        table[k][i] = (k % 2 == 1) ? table[k - 2][i + 1] : 1e300;
      } else {
        table[k][i] = prev + 1.0 / diff;
      }
    }
  }
  // Odd columns (1, 3, 5, ...) hold extrapolated sums; take the last entry of each.
  double best = s.back();
  double prev_best = s[n - 2];
  for (std::size_t k = 1; k <= n; k += 2) {
    const std::size_t len = n - (k - 1);
    if (len < 2) break;
    const double a = table[k][len - 1];
    const double b = table[k][len - 2];
    if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a) > 1e250) break;
    best = a;
    prev_best = b;
  }
  return {best, std::abs(best - prev_best)};
}

}  // namespace trf::quad
