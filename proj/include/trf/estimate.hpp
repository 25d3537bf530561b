// Sample-path and covariance-side estimators: directional Hoelder exponents
// from variograms, box-counting dimension of graphs, the two-regime decay of
// increment covariances, and checks of the operator scaling law.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trf/covariance.hpp"
#include "trf/simulate.hpp"
#include "trf/stats.hpp"

namespace trf::estimate {

using json = nlohmann::json;

struct EstimateReport {
  std::string estimator;
  double estimate = 0.0;
  double se = 0.0;
  stats::LinearFit fit;
  double window_lo = 0.0, window_hi = 0.0;
  std::vector<double> scales, statistics;  // (scale, statistic) pairs behind the fit
  std::optional<double> target;
  double tolerance = 0.0;
  bool pass = true;  // |estimate - target| <= tolerance when a target is attached
  json extra = json::object();

  void judge();  // sets pass from target and tolerance
  json to_json() const;
  std::string to_csv() const;
};

struct HolderOptions {
  int lag_lo = 2;
  int lag_hi = 16;
};

// Empirical variogram mean |X(s + k step) - X(s)|^2 over all grid positions and
// paths for k in [lag_lo, lag_hi]; estimate = slope of log variogram / 2.
EstimateReport directional_holder(const std::vector<simulate::Realization>& paths, const std::vector<int>& step,
                                  std::optional<double> target = {}, double tolerance = 0.1,
                                  HolderOptions opt = {});

// Same fit on the exact variogram E|X(k h r)|^2 = cov(k h r, k h r), h = spacing.
EstimateReport directional_holder_analytic(const covariance::CovarianceFn& cov, const Vec& direction, double spacing,
                                           std::optional<double> target = {}, double tolerance = 0.05,
                                           HolderOptions opt = {});

struct BoxOptions {
  // Fit scales 2^{-j} for j in [level_lo, level_hi]; by default every level whose
  // columns hold at least min_column samples per axis.
  int level_lo = 1;
  int level_hi = 0;
  int min_column = 16;
};

// Box counting of the graph {(x, X(x))} on the unit cube after rescaling the
// grid and the values to [0, 1]: N(eps) = sum over columns max(range / eps, 1).
// Averages the per-path slopes.
EstimateReport box_dimension(const std::vector<simulate::Realization>& paths, std::optional<double> target = {},
                             double tolerance = 0.1, BoxOptions opt = {});

struct SemiLrdOptions {
  std::vector<double> small_lags;  // default 2..16
  std::vector<double> large_lags;  // default every lag in [L/4, L/2], L = 128
  double min_r2 = 0.9;
};

// Increment covariance gamma(k) = Cov(X(k+1) - X(k), X(1) - X(0)) (n = 1).
// Reports the small-lag log-log slope of |gamma| and the large-lag semilog
// slope. An exponential window is declared when the semilog fit has
// R^2 >= min_r2, fits better than a power law on the same lags, and decays.
EstimateReport semi_lrd_profile(const covariance::CovarianceModel& cov, const SemiLrdOptions& opt = {});

// cov_lambda(c x, c x2) against c^H cov_{c lambda}(x, x2) c^{H^T} on all site pairs.
EstimateReport scaling_law_analytic(const covariance::IsotropicGaussianSpec& spec, covariance::Method method, double c,
                                    const std::vector<Vec>& sites, double tolerance);

// Empirical variances of X_lambda(c x) from n_draws exact samples against
// c^{2H} Var X_{c lambda}(x); pass when every site is within 3 standard errors (n = 1).
EstimateReport scaling_law_monte_carlo(const covariance::IsotropicGaussianSpec& spec, covariance::Method method,
                                       double c, const std::vector<Vec>& sites, int n_draws, std::uint64_t seed);

struct StableLawOptions {
  std::vector<double> u = {0.25, 0.5, 1.0, 1.5, 2.0};
  double cell_width = 0.05;
  double bands = 3.0;  // Monte Carlo standard errors
};

// Tempered fractional stable motion: empirical characteristic function of the
// synthesized X_lambda(c t) against exp(-|u c^H|^alpha ||k_{c lambda}(t, .)||_alpha^alpha).
// The allowed deviation is bands * SE plus the Riemann bias |chf_continuous - chf_discrete|.
EstimateReport scaling_law_stable(double h, double alpha, double lambda, double c, double t, int n_draws,
                                  std::uint64_t seed, const StableLawOptions& opt = {});

// Empirical characteristic function of the synthesized TFSM value X(t) against
// exp(-|u|^alpha ||k(t, .)||_alpha^alpha) with the same band rule.
EstimateReport stable_chf_check(double h, double alpha, double lambda, double t, int n_draws, std::uint64_t seed,
                                const StableLawOptions& opt = {});

}  // namespace trf::estimate
