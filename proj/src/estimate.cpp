#include "trf/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trf/io.hpp"
#include "trf/kernels.hpp"
#include "trf/matfun.hpp"

namespace trf::estimate {

namespace {

void require_scalar_paths(const std::vector<simulate::Realization>& paths, const char* who) {
  require(!paths.empty(), ErrorCode::InvalidArgument, std::string(who) + ": no realizations");
  for (const auto& p : paths) {
    require(p.n == 1, ErrorCode::InvalidArgument, std::string(who) + ": needs scalar (n = 1) paths");
    require(p.grid.count == paths[0].grid.count && p.grid.lo == paths[0].grid.lo && p.grid.hi == paths[0].grid.hi,
            ErrorCode::InvalidArgument, std::string(who) + ": realizations live on different grids");
  }
}

// Longest run of consecutive entries with one sign; fit windows are split at sign changes.
std::pair<std::size_t, std::size_t> longest_signed_run(const std::vector<double>& v) {
  std::size_t best_begin = 0, best_len = 0, begin = 0;
  for (std::size_t i = 0; i <= v.size(); ++i) {
    const bool boundary = i == v.size() || v[i] == 0.0 || (i > begin && (v[i] > 0.0) != (v[begin] > 0.0));
    if (boundary) {
      if (i - begin > best_len) {
        best_len = i - begin;
        best_begin = begin;
      }
      begin = (i < v.size() && v[i] == 0.0) ? i + 1 : i;
    }
  }
  return {best_begin, best_begin + best_len};
}

std::vector<double> default_lags(int lo, int hi) {
  std::vector<double> out;
  for (int k = lo; k <= hi; ++k) out.push_back(k);
  return out;
}

}  // namespace

void EstimateReport::judge() {
  if (target) pass = std::abs(estimate - *target) <= tolerance;
}

json EstimateReport::to_json() const {
  json j{{"estimator", estimator},
         {"estimate", estimate},
         {"se", se},
         {"fit", {{"slope", fit.slope}, {"intercept", fit.intercept}, {"slope_se", fit.slope_se}, {"r2", fit.r2},
                  {"points", fit.points}}},
         {"window", {window_lo, window_hi}},
         {"tolerance", tolerance},
         {"pass", pass},
         {"extra", extra}};
  j["target"] = target ? json(*target) : json(nullptr);
  return j;
}

std::string EstimateReport::to_csv() const {
  std::string out = "scale,statistic\n";
  for (std::size_t i = 0; i < scales.size(); ++i) {
    out += io::format_double(scales[i]) + "," + io::format_double(statistics[i]) + "\n";
  }
  return out;
}

// ---- Hoelder exponents -------------------------------------------------------

EstimateReport directional_holder(const std::vector<simulate::Realization>& paths, const std::vector<int>& step,
                                  std::optional<double> target, double tolerance, HolderOptions opt) {
  require_scalar_paths(paths, "directional_holder");
  const simulate::GridSpec& g = paths[0].grid;
  require(static_cast<int>(step.size()) == g.d, ErrorCode::InvalidArgument, "directional_holder: step has wrong length");
  require(opt.lag_lo >= 1 && opt.lag_hi - opt.lag_lo + 1 >= 5, ErrorCode::InvalidArgument,
          "directional_holder: the lag window needs >= 5 lags");
  int collinear = std::numeric_limits<int>::max();
  double unit = 0.0;
  for (int a = 0; a < g.d; ++a) {
    if (step[a] != 0) collinear = std::min(collinear, (g.count[a] - 1) / std::abs(step[a]) + 1);
    unit += std::pow(step[a] * g.node_step(a), 2);
  }
  require(unit > 0.0, ErrorCode::InvalidArgument, "directional_holder: zero step");
  require(collinear >= 32 && collinear > opt.lag_hi, ErrorCode::InvalidArgument,
          "directional_holder: fewer than 32 collinear sites along the direction");
  unit = std::sqrt(unit);
  EstimateReport r;
  r.estimator = "directional_holder";
  std::vector<double> lx, ly;
  for (int k = opt.lag_lo; k <= opt.lag_hi; ++k) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s < g.size(); ++s) {
      const auto idx = g.index(s);
      std::size_t other = 0;
      bool inside = true;
      for (int a = 0; a < g.d; ++a) {
        const int j = idx[a] + k * step[a];
        inside = inside && j >= 0 && j < g.count[a];
        other = other * g.count[a] + static_cast<std::size_t>(std::max(j, 0));
      }
      if (!inside) continue;
      for (const auto& p : paths) {
        const double diff = p.values(static_cast<Eigen::Index>(other), 0) - p.values(static_cast<Eigen::Index>(s), 0);
        sum += diff * diff;
      }
      count += paths.size();
    }
    const double v = sum / static_cast<double>(count);
    require(v > 0.0, ErrorCode::InvalidArgument, "directional_holder: degenerate (zero) variogram");
    r.scales.push_back(k * unit);
    r.statistics.push_back(v);
    lx.push_back(std::log(k * unit));
    ly.push_back(std::log(v));
  }
  r.fit = stats::linear_fit(lx, ly);
  r.estimate = 0.5 * r.fit.slope;
  r.se = 0.5 * r.fit.slope_se;
  r.window_lo = opt.lag_lo * unit;
  r.window_hi = opt.lag_hi * unit;
  r.target = target;
  r.tolerance = tolerance;
  r.extra["paths"] = paths.size();
  r.judge();
  return r;
}

EstimateReport directional_holder_analytic(const covariance::CovarianceFn& cov, const Vec& direction, double spacing,
                                           std::optional<double> target, double tolerance, HolderOptions opt) {
  require(cov.components() == 1, ErrorCode::InvalidArgument, "directional_holder: needs a scalar field");
  require(direction.size() == cov.dim() && direction.norm() > 0.0, ErrorCode::InvalidArgument,
          "directional_holder: bad direction");
  require(spacing > 0.0, ErrorCode::InvalidArgument, "directional_holder: spacing must be positive");
  const Vec r_hat = direction.normalized();
  EstimateReport r;
  r.estimator = "directional_holder_analytic";
  std::vector<double> lx, ly;
  for (int k = opt.lag_lo; k <= opt.lag_hi; ++k) {
    const Vec x = (k * spacing) * r_hat;
    const double v = cov.cov(x, x)(0, 0);
    require(v > 0.0, ErrorCode::InvalidArgument, "directional_holder: degenerate (zero) variogram");
    r.scales.push_back(k * spacing);
    r.statistics.push_back(v);
    lx.push_back(std::log(k * spacing));
    ly.push_back(std::log(v));
  }
  r.fit = stats::linear_fit(lx, ly);
  r.estimate = 0.5 * r.fit.slope;
  r.se = 0.5 * r.fit.slope_se;
  r.window_lo = opt.lag_lo * spacing;
  r.window_hi = opt.lag_hi * spacing;
  r.target = target;
  r.tolerance = tolerance;
  r.judge();
  return r;
}

// ---- box counting ------------------------------------------------------------

EstimateReport box_dimension(const std::vector<simulate::Realization>& paths, std::optional<double> target,
                             double tolerance, BoxOptions opt) {
  require_scalar_paths(paths, "box_dimension");
  const simulate::GridSpec& g = paths[0].grid;
  require(g.d == 1 || g.d == 2, ErrorCode::InvalidArgument, "box_dimension: d must be 1 or 2");
  int points = g.count[0];
  for (int c : g.count) points = std::min(points, c);
  require(points >= 256, ErrorCode::InvalidArgument, "box_dimension: needs >= 256 sites per axis");
  const int intervals = points - 1;
  int level_hi = opt.level_hi;
  if (level_hi <= 0) {
    level_hi = opt.level_lo;
    while (intervals / (1 << (level_hi + 1)) >= opt.min_column) ++level_hi;
  }
  require(level_hi - opt.level_lo + 1 >= 5, ErrorCode::InvalidArgument, "box_dimension: fewer than 5 dyadic scales");
  require(intervals / (1 << level_hi) >= 1, ErrorCode::InvalidArgument, "box_dimension: scale finer than the grid");

  EstimateReport r;
  r.estimator = "box_dimension";
  std::vector<double> slopes;
  std::vector<double> mean_log_count(level_hi - opt.level_lo + 1, 0.0);
  std::vector<double> log_inv_eps;
  for (const auto& p : paths) {
    const double vmin = p.values.col(0).minCoeff(), vmax = p.values.col(0).maxCoeff();
    const double span = vmax > vmin ? vmax - vmin : 1.0;
    auto value = [&](int i, int j) {
      const std::size_t lin = g.d == 1 ? static_cast<std::size_t>(i)
                                       : static_cast<std::size_t>(i) * g.count[1] + static_cast<std::size_t>(j);
      return (p.values(static_cast<Eigen::Index>(lin), 0) - vmin) / span;
    };
    std::vector<double> lx, ly;
    for (int level = opt.level_lo; level <= level_hi; ++level) {
      const int cols = 1 << level;
      const int m = intervals / cols;
      const double eps = static_cast<double>(m) / intervals;
      double boxes = 0.0;
      const int cols_y = g.d == 2 ? cols : 1;
      for (int cx = 0; cx < cols; ++cx) {
        for (int cy = 0; cy < cols_y; ++cy) {
          double lo = std::numeric_limits<double>::infinity(), hi = -lo;
          for (int i = cx * m; i <= (cx + 1) * m; ++i) {
            if (g.d == 1) {
              const double v = value(i, 0);
              lo = std::min(lo, v);
              hi = std::max(hi, v);
            } else {
              for (int j = cy * m; j <= (cy + 1) * m; ++j) {
                const double v = value(i, j);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
              }
            }
          }
          boxes += std::max((hi - lo) / eps, 1.0);
        }
      }
      lx.push_back(std::log(1.0 / eps));
      ly.push_back(std::log(boxes));
    }
    const auto fit = stats::linear_fit(lx, ly);
    slopes.push_back(fit.slope);
    for (std::size_t i = 0; i < ly.size(); ++i) mean_log_count[i] += ly[i] / static_cast<double>(paths.size());
    log_inv_eps = lx;
  }
  r.fit = stats::linear_fit(log_inv_eps, mean_log_count);
  r.estimate = stats::mean(slopes);
  r.se = slopes.size() > 1 ? std::sqrt(stats::variance(slopes) / static_cast<double>(slopes.size())) : r.fit.slope_se;
  for (std::size_t i = 0; i < log_inv_eps.size(); ++i) {
    r.scales.push_back(std::exp(-log_inv_eps[i]));
    r.statistics.push_back(std::exp(mean_log_count[i]));
  }
  r.window_lo = r.scales.back();
  r.window_hi = r.scales.front();
  r.target = target;
  r.tolerance = tolerance;
  r.extra["levels"] = {opt.level_lo, level_hi};
  r.extra["paths"] = paths.size();
  r.judge();
  return r;
}

// ---- semi long-range dependence -----------------------------------------------

EstimateReport semi_lrd_profile(const covariance::CovarianceModel& cov, const SemiLrdOptions& opt) {
  require(cov.components() == 1, ErrorCode::InvalidArgument, "semi_lrd_profile: needs n = 1");
  const std::vector<double> small = opt.small_lags.empty() ? default_lags(2, 16) : opt.small_lags;
  const std::vector<double> large = opt.large_lags.empty() ? default_lags(32, 64) : opt.large_lags;
  require(small.size() >= 5 && large.size() >= 5, ErrorCode::InvalidArgument,
          "semi_lrd_profile: each window needs >= 5 lags");
  auto gamma = [&](const std::vector<double>& lags) {
    std::vector<double> g(lags.size());
    parallel_for(lags.size(), [&](std::size_t i) { g[i] = covariance::increment_covariance(cov, lags[i])(0, 0); });
    return g;
  };
  EstimateReport r;
  r.estimator = "semi_lrd_profile";
  const auto gs = gamma(small);
  const auto gl = gamma(large);
  auto fit_run = [&](const std::vector<double>& lags, const std::vector<double>& g, bool log_x, bool& split) {
    const auto [b, e] = longest_signed_run(g);
    split = (e - b) != g.size();
    require(e - b >= 5, ErrorCode::InvalidArgument, "semi_lrd_profile: fewer than 5 same-sign lags in a window");
    std::vector<double> x, y;
    for (std::size_t i = b; i < e; ++i) {
      x.push_back(log_x ? std::log(lags[i]) : lags[i]);
      y.push_back(std::log(std::abs(g[i])));
    }
    return stats::linear_fit(x, y);
  };
  bool split_small = false, split_large = false, split_ll = false;
  const auto small_fit = fit_run(small, gs, true, split_small);
  const auto semilog = fit_run(large, gl, false, split_large);
  const auto loglog = fit_run(large, gl, true, split_ll);
  const bool exponential = semilog.r2 >= opt.min_r2 && semilog.r2 > loglog.r2 && semilog.slope < 0.0;
  r.fit = semilog;
  r.estimate = semilog.slope;
  r.se = semilog.slope_se;
  r.window_lo = large.front();
  r.window_hi = large.back();
  for (std::size_t i = 0; i < small.size(); ++i) {
    r.scales.push_back(small[i]);
    r.statistics.push_back(gs[i]);
  }
  for (std::size_t i = 0; i < large.size(); ++i) {
    r.scales.push_back(large[i]);
    r.statistics.push_back(gl[i]);
  }
  const double lambda = cov.spec().lambda;
  r.target = -lambda;
  r.tolerance = 0.2 * lambda;
  r.extra = json{{"small_lag_slope", small_fit.slope},
                 {"small_lag_slope_se", small_fit.slope_se},
                 {"small_lag_r2", small_fit.r2},
                 {"semilog_slope", semilog.slope},
                 {"semilog_r2", semilog.r2},
                 {"loglog_slope", loglog.slope},
                 {"loglog_r2", loglog.r2},
                 {"exponential_window", exponential},
                 {"window_split", split_small || split_large}};
  r.judge();
  r.pass = r.pass && exponential;
  return r;
}

// ---- operator scaling --------------------------------------------------------

EstimateReport scaling_law_analytic(const covariance::IsotropicGaussianSpec& spec, covariance::Method method, double c,
                                    const std::vector<Vec>& sites, double tolerance) {
  require(c > 0.0, ErrorCode::InvalidArgument, "scaling_law_check: c must be positive");
  const covariance::CovarianceModel base(spec, method);
  covariance::IsotropicGaussianSpec scaled_spec = spec;
  scaled_spec.lambda = c * spec.lambda;
  const covariance::CovarianceModel scaled(scaled_spec, method);
  const Mat ch = matfun::matrix_power(matfun::MatrixExponent(spec.H), c);
  std::vector<Vec> big;
  for (const Vec& x : sites) big.push_back(c * x);
  base.prepare(big);
  scaled.prepare(sites);
  double worst = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i; j < sites.size(); ++j) {
      const Mat lhs = base.cov(big[i], big[j]);
      const Mat rhs = ch * scaled.cov(sites[i], sites[j]) * ch.transpose();
      const double scale = std::max(lhs.norm(), rhs.norm());
      if (scale == 0.0) continue;
      worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
  }
  EstimateReport r;
  r.estimator = "scaling_law_analytic";
  r.estimate = worst;
  r.target = 0.0;
  r.tolerance = tolerance;
  r.extra = json{{"c", c}, {"method", covariance::method_name(method)}, {"pairs", sites.size() * (sites.size() + 1) / 2}};
  r.judge();
  return r;
}

EstimateReport scaling_law_monte_carlo(const covariance::IsotropicGaussianSpec& spec, covariance::Method method,
                                       double c, const std::vector<Vec>& sites, int n_draws, std::uint64_t seed) {
  require(spec.n == 1, ErrorCode::InvalidArgument, "scaling_law_check: the Monte Carlo form needs n = 1");
  require(n_draws >= 100, ErrorCode::InvalidArgument, "scaling_law_check: needs >= 100 draws");
  const covariance::CovarianceModel base(spec, method);
  covariance::IsotropicGaussianSpec scaled_spec = spec;
  scaled_spec.lambda = c * spec.lambda;
  const covariance::CovarianceModel scaled(scaled_spec, method);
  std::vector<Vec> big;
  for (const Vec& x : sites) big.push_back(c * x);
  const simulate::GaussianSampler sampler(base, big);
  std::vector<double> sum_sq(sites.size(), 0.0);
  for (int k = 0; k < n_draws; ++k) {
    const Mat x = sampler.draw(seed, static_cast<std::uint32_t>(k));
    for (std::size_t i = 0; i < sites.size(); ++i) sum_sq[i] += x(static_cast<Eigen::Index>(i), 0) * x(static_cast<Eigen::Index>(i), 0);
  }
  const double c2h = std::pow(c, 2.0 * spec.h(0));
  double worst = 0.0;
  json per_site = json::array();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const double expect = c2h * scaled.variance(sites[i].norm())(0, 0);
    if (expect == 0.0) continue;
    const double empirical = sum_sq[i] / n_draws;  // the mean is known to be zero
    const double se = std::sqrt(2.0 / n_draws) * expect;
    const double z = (empirical - expect) / se;
    worst = std::max(worst, std::abs(z));
    per_site.push_back({{"empirical", empirical}, {"expected", expect}, {"z", z}});
  }
  EstimateReport r;
  r.estimator = "scaling_law_monte_carlo";
  r.estimate = worst;
  r.target = 0.0;
  r.tolerance = 3.0;
  r.extra = json{{"c", c}, {"draws", n_draws}, {"sites", per_site}};
  r.judge();
  return r;
}

namespace {

EstimateReport chf_compare(const std::string& name, double h, double alpha, double lambda, double t_site,
                           double theory_norm, double u_scale, int n_draws, std::uint64_t seed,
                           const StableLawOptions& opt) {
  require(t_site != 0.0, ErrorCode::InvalidArgument, "stable law check: t must be nonzero");
  require(n_draws >= 100, ErrorCode::InvalidArgument, "stable law check: needs >= 100 draws");
  Mat e(1, 1), hm(1, 1);
  e(0, 0) = 1.0;
  hm(0, 0) = h;
  const auto spec = kernels::make_field_spec(kernels::Flavor::MA, lambda, e, hm, aniso::PhiVariant::PositivePart,
                                             kernels::MeasureSpec::sas({alpha}));
  const auto sites_grid = simulate::GridSpec::regular({std::min(0.0, t_site)}, {std::max(0.0, t_site)}, {2});
  const auto cells = simulate::default_integration_grid(spec, sites_grid, opt.cell_width);
  const simulate::MovingAverageSampler sampler(spec, {Vec::Constant(1, t_site)}, cells);
  const double discrete_norm = sampler.lalpha_norms()(0, 0);
  std::vector<double> x(n_draws);
  parallel_for(static_cast<std::size_t>(n_draws),
               [&](std::size_t k) { x[k] = sampler.draw(seed, static_cast<std::uint32_t>(k))(0, 0); });
  EstimateReport r;
  r.estimator = name;
  double worst = 0.0;
  bool ok = true;
  json points = json::array();
  for (double u : opt.u) {
    const auto ecf = stats::empirical_cf(x, u);
    const double w = std::pow(std::abs(u * u_scale), alpha);
    const double theory = std::exp(-w * theory_norm);
    const double discrete = std::exp(-std::pow(std::abs(u), alpha) * discrete_norm);
    const double bias = std::abs(theory - discrete);
    const double dev = std::abs(ecf.value - theory);
    const double band = opt.bands * ecf.se + bias;
    ok = ok && dev <= band;
    worst = std::max(worst, dev / band);
    r.scales.push_back(u);
    r.statistics.push_back(ecf.value);
    points.push_back({{"u", u}, {"ecf", ecf.value}, {"se", ecf.se}, {"theory", theory}, {"riemann_bias", bias}});
  }
  r.estimate = worst;  // largest deviation in units of the allowed band
  r.tolerance = 1.0;
  r.pass = ok;
  r.extra = json{{"points", points},
                 {"continuous_norm", theory_norm},
                 {"discrete_norm", discrete_norm},
                 {"cells", cells.size()},
                 {"draws", n_draws}};
  return r;
}

}  // namespace

EstimateReport scaling_law_stable(double h, double alpha, double lambda, double c, double t, int n_draws,
                                  std::uint64_t seed, const StableLawOptions& opt) {
  require(c > 0.0, ErrorCode::InvalidArgument, "scaling_law_check: c must be positive");
  const double norm = kernels::tfsm_lalpha_norm(h, alpha, c * lambda, t);
  auto r = chf_compare("scaling_law_stable", h, alpha, lambda, c * t, norm, std::pow(c, h), n_draws, seed, opt);
  r.extra["c"] = c;
  return r;
}

EstimateReport stable_chf_check(double h, double alpha, double lambda, double t, int n_draws, std::uint64_t seed,
                                const StableLawOptions& opt) {
  const double norm = kernels::tfsm_lalpha_norm(h, alpha, lambda, t);
  return chf_compare("stable_chf_check", h, alpha, lambda, t, norm, 1.0, n_draws, seed, opt);
}

}  // namespace trf::estimate
