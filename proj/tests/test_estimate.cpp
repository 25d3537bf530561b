#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trf/estimate.hpp"

using namespace trf;
using namespace trf::estimate;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

// Brownian path on [0, 1]: variogram exactly proportional to the lag.
simulate::Realization brownian(int points, std::uint64_t seed) {
  simulate::Realization r;
  r.grid = simulate::GridSpec::regular({0.0}, {1.0}, {points});
  r.n = 1;
  r.values = Mat::Zero(points, 1);
  std::mt19937_64 g(seed);
  std::normal_distribution<double> n(0.0, std::sqrt(1.0 / (points - 1)));
  for (int i = 1; i < points; ++i) r.values(i, 0) = r.values(i - 1, 0) + n(g);
  return r;
}

}  // namespace

TEST_CASE("report judging and serialization") {
  EstimateReport r;
  r.estimator = "demo";
  r.estimate = 0.52;
  r.target = 0.5;
  r.tolerance = 0.05;
  r.scales = {1.0, 2.0};
  r.statistics = {0.1, 0.2};
  r.judge();
  CHECK(r.pass);
  r.tolerance = 0.01;
  r.judge();
  CHECK_FALSE(r.pass);
  const auto j = r.to_json();
  CHECK(j.at("estimator") == "demo");
  CHECK(j.at("pass") == false);
  const std::string csv = r.to_csv();
  CHECK(csv.rfind("scale,statistic\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("directional Hoelder exponent of Brownian paths") {
  std::vector<simulate::Realization> paths;
  for (int k = 0; k < 20; ++k) paths.push_back(brownian(1024, 100 + k));
  const auto r = directional_holder(paths, {1}, 0.5, 0.05);
  CHECK(r.estimate == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.pass);
  CHECK(r.fit.points == 15);
  CHECK_THROWS_AS(directional_holder({brownian(16, 1)}, {1}), Error);
}

TEST_CASE("box dimension of a line and of Brownian paths") {
  simulate::Realization line = brownian(1025, 1);
  for (int i = 0; i < 1025; ++i) line.values(i, 0) = 0.3 * i;
  auto r = box_dimension({line});
  CHECK(r.estimate == doctest::Approx(1.0).epsilon(0.02));

  std::vector<simulate::Realization> paths;
  for (int k = 0; k < 10; ++k) paths.push_back(brownian(4097, 200 + k));
  r = box_dimension(paths, 1.5, 0.1);
  CHECK(r.pass);
  CHECK(r.se > 0.0);
  CHECK_THROWS_AS(box_dimension({brownian(64, 1)}), Error);
}

TEST_CASE("analytic variogram slope recovers H for weak tempering") {
  for (double h : {0.3, 0.8}) {
    const auto s = covariance::IsotropicGaussianSpec::make(covariance::IsoVariant::ITOFBF, 1, 0.01, scalar(h));
    const covariance::CovarianceModel m(s, covariance::Method::KernelQuadrature);
    const auto r = directional_holder_analytic(m, Vec::Constant(1, 1.0), 1.0 / 1024, h, 0.05);
    CHECK(r.pass);
  }
}

TEST_CASE("semi-long-range dependence profile") {
  const auto s = covariance::IsotropicGaussianSpec::make(covariance::IsoVariant::IBTOFBF, 1, 1.0, scalar(0.7));
  const covariance::CovarianceModel m(s, covariance::Method::ClosedForm);
  const auto r = semi_lrd_profile(m);
  CHECK(r.extra.at("exponential_window") == true);
  CHECK(r.extra.at("semilog_slope").get<double>() == doctest::Approx(-1.0).epsilon(0.1));
  CHECK(r.pass);

  const auto weak = covariance::IsotropicGaussianSpec::make(covariance::IsoVariant::IBTOFBF, 1, 1e-3, scalar(0.7));
  const auto rw = semi_lrd_profile(covariance::CovarianceModel(weak, covariance::Method::ClosedForm));
  CHECK(rw.extra.at("exponential_window") == false);
}

TEST_CASE("operator scaling law checks") {
  const auto s = covariance::IsotropicGaussianSpec::make(covariance::IsoVariant::ITOFBF, 1, 0.7, scalar(0.6));
  std::vector<Vec> sites;
  for (double x : {0.2, 0.5, 1.0}) sites.push_back(Vec::Constant(1, x));
  const auto a = scaling_law_analytic(s, covariance::Method::KernelQuadrature, 2.0, sites, 1e-6);
  CHECK(a.pass);
  CHECK(a.estimate < 1e-6);

  const auto mc = scaling_law_monte_carlo(s, covariance::Method::KernelQuadrature, 2.0, sites, 2000, 7);
  CHECK(mc.pass);
  CHECK(mc.tolerance == 3.0);
}
