// Small statistics toolkit for the estimators and Monte Carlo checks.
#pragma once

#include <vector>

namespace trf::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // ordinary least-squares standard error
  double r2 = 0.0;
  int points = 0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
// Unbiased sample variance.
double variance(const std::vector<double>& v);
double quantile(std::vector<double> v, double p);  // linear interpolation

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov distribution.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
// P(K > t) for the Kolmogorov distribution.
double kolmogorov_survival(double t);

// Hill estimator of the tail index from the k largest absolute values.
double hill_estimator(const std::vector<double>& sample, int k);

// Real part of the empirical characteristic function (symmetric samples) and
// its Monte Carlo standard error.
struct EcfEstimate {
  double value = 0.0;
  double se = 0.0;
};
EcfEstimate empirical_cf(const std::vector<double>& sample, double u);

}  // namespace trf::stats
