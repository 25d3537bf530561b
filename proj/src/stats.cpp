#include "trf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "trf/common.hpp"

namespace trf::stats {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument, "linear_fit: needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::InvalidArgument, "linear_fit: abscissae are all equal");
  LinearFit f;
  f.points = static_cast<int>(x.size());
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return f;
}

double mean(const std::vector<double>& v) {
  require(!v.empty(), ErrorCode::InvalidArgument, "mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  require(v.size() >= 2, ErrorCode::InvalidArgument, "variance: needs >= 2 values");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double quantile(std::vector<double> v, double p) {
  require(!v.empty() && p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "quantile: bad input");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double f = pos - static_cast<double>(i);
  return v[i] * (1.0 - f) + v[i + 1] * f;
}

double kolmogorov_survival(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::InvalidArgument, "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  KsResult r;
  r.statistic = d;
  r.p_value = kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d);
  return r;
}

double hill_estimator(const std::vector<double>& sample, int k) {
  require(k >= 2 && static_cast<std::size_t>(k) < sample.size(), ErrorCode::InvalidArgument,
          "hill_estimator: need 2 <= k < sample size");
  std::vector<double> a(sample.size());
  std::transform(sample.begin(), sample.end(), a.begin(), [](double x) { return std::abs(x); });
  std::nth_element(a.begin(), a.begin() + k, a.end(), std::greater<double>());
  const double threshold = a[k];
  double s = 0.0;
  for (int i = 0; i < k; ++i) s += std::log(a[i] / threshold);
  return static_cast<double>(k) / s;
}

EcfEstimate empirical_cf(const std::vector<double>& sample, double u) {
  require(sample.size() >= 2, ErrorCode::InvalidArgument, "empirical_cf: needs >= 2 values");
  std::vector<double> c(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) c[i] = std::cos(u * sample[i]);
  EcfEstimate e;
  e.value = mean(c);
  e.se = std::sqrt(variance(c) / static_cast<double>(c.size()));
  return e;
}

}  // namespace trf::stats
