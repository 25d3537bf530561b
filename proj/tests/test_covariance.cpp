#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <random>

#include "trf/covariance.hpp"
#include "trf/quadrature.hpp"
#include "trf/simulate.hpp"
#include "trf/specfun.hpp"

using namespace trf;
using namespace trf::covariance;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }
Vec point(double v) { return Vec::Constant(1, v); }

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Mat h2() {
  Mat h(2, 2);
  h << 0.55, 0.1, 0.05, 0.8;
  return h;
}

}  // namespace

// Reference values: tests/oracles/mp_reference.py.
TEST_CASE("Bessel-tempered closed form against mpmath") {
  struct Case {
    double h, lambda, x, x2, value;
  };
  const Case cases[] = {{0.7, 1.0, 1.0, 0.4, 0.71658465475398121134},
                        {0.6, 0.3, 2.0, -0.5, -0.11493209075543125053},
                        {0.9, 1.0, 0.25, 3.0, 0.12348262132355469791}};
  for (const auto& c : cases) {
    const auto s = IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, 1, c.lambda, scalar(c.h));
    CHECK(ibtofbf_cov(s, point(c.x), point(c.x2))(0, 0) == doctest::Approx(c.value).epsilon(1e-9));
    const CovarianceModel spectral(s, Method::SpectralIntegral);
    CHECK(spectral.cov(point(c.x), point(c.x2))(0, 0) == doctest::Approx(c.value).epsilon(1e-7));
  }
}

TEST_CASE("exponentially tempered covariance against mpmath") {
  struct Case {
    double h, lambda, x, x2, value;
  };
  const Case cases[] = {{0.6, 1.0, 1.0, 0.4, 0.12304098258369215728},
                        {0.3, 1.0, 0.7, -0.2, 0.049499831655911650835},
                        {0.7, 0.5, 1.5, 1.0, 0.21452476474381615026}};
  for (const auto& c : cases) {
    const auto s = IsotropicGaussianSpec::make(IsoVariant::ITOFBF, 1, c.lambda, scalar(c.h));
    CHECK(itofbf_cov(s, point(c.x), point(c.x2))(0, 0) == doctest::Approx(c.value).epsilon(1e-8));
    CHECK(itofbf_cov_spectral(s, point(c.x), point(c.x2))(0, 0) == doctest::Approx(c.value).epsilon(1e-6));
  }
}

TEST_CASE("Fourier transform of the Bessel density") {
  // u = 0: int (lambda^2 + xi^2)^{-s} d xi = sqrt(pi) Gamma(s - 1/2) / Gamma(s) lambda^{1 - 2s}.
  for (double s : {0.8, 1.4, 2.5}) {
    for (double lambda : {0.3, 1.0, 2.0}) {
      const double expect = std::sqrt(kPi) * specfun::gamma(s - 0.5) / specfun::gamma(s) * std::pow(lambda, 1.0 - 2.0 * s);
      CHECK(bessel_fourier_term(1, s, lambda, 0.0) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  // s = 1: pi / lambda e^{-lambda u}.
  CHECK(bessel_fourier_term(1, 1.0, 0.7, 2.0) == doctest::Approx(kPi / 0.7 * std::exp(-1.4)).epsilon(1e-12));
  // d = 3, s = 2: pi^2 / lambda e^{-lambda u}.
  CHECK(bessel_fourier_term(3, 2.0, 0.7, 2.0) == doctest::Approx(kPi * kPi / 0.7 * std::exp(-1.4)).epsilon(1e-12));
  // Direct quadrature in d = 1 for an integrable density.
  const double s = 1.7, lambda = 0.9, u = 1.3;
  auto f = [&](double xi) { return 2.0 * std::cos(u * xi) * std::pow(lambda * lambda + xi * xi, -s); };
  double direct = 0.0;
  for (int k = 0; k < 400; ++k) direct += quad::gauss_kronrod<double>(f, 0.5 * k, 0.5 * (k + 1), {1e-15, 1e-13}).value;
  CHECK(bessel_fourier_term(1, s, lambda, u) == doctest::Approx(direct).epsilon(1e-5));
}

TEST_CASE("normalization constant of the Bessel-tempered field") {
  for (double h : {0.6, 0.9}) {
    for (double lambda : {0.5, 2.0}) {
      const auto s = IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, 1, lambda, scalar(h));
      CHECK(ibtofbf_spectral_constant(s) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("the three covariance routes agree") {
  std::mt19937_64 g(41);
  std::normal_distribution<double> n;
  for (int d : {1, 2}) {
    for (IsoVariant v : {IsoVariant::IBTOFBF, IsoVariant::ITOFBF}) {
      const Mat h = v == IsoVariant::IBTOFBF ? Mat(h2() + 0.5 * d * Mat::Identity(2, 2)) : h2();
      const auto s = IsotropicGaussianSpec::make(v, d, 0.7, h);
      std::vector<Method> methods = {Method::SpectralIntegral};
      // The d = 2 Bessel kernel route nests a matrix Bessel quadrature inside a 2-D one: minutes per pair.
      if (!(d == 2 && v == IsoVariant::IBTOFBF)) methods.push_back(Method::KernelQuadrature);
      if (v == IsoVariant::IBTOFBF) methods.push_back(Method::ClosedForm);
      std::vector<std::unique_ptr<CovarianceModel>> models;
      for (Method m : methods) models.push_back(std::make_unique<CovarianceModel>(s, m));
      for (int i = 0; i < 4; ++i) {
        Vec x(d), y(d);
        for (int k = 0; k < d; ++k) {
          x(k) = n(g);
          y(k) = n(g);
        }
        const Mat ref = models[0]->cov(x, y);
        for (std::size_t m = 1; m < models.size(); ++m) {
          CAPTURE(d);
          CAPTURE(m);
          CHECK(rel(models[m]->cov(x, y), ref) < 1e-5);
        }
      }
    }
  }
}

TEST_CASE("covariance symmetry and positive semidefinite Gram matrices") {
  const auto s = IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, 2, 0.5, Mat(h2() + Mat::Identity(2, 2)));
  const CovarianceModel m(s, Method::ClosedForm);
  std::mt19937_64 g(42);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Vec> sites;
  for (int i = 0; i < 30; ++i) {
    Vec x(2);
    x << u(g), u(g);
    sites.push_back(x);
  }
  for (int i = 0; i + 1 < 30; ++i) {
    CHECK(rel(m.cov(sites[i], sites[i + 1]), Mat(m.cov(sites[i + 1], sites[i]).transpose())) < 1e-12);
  }
  const Mat gram = simulate::gram_matrix(m, sites);
  Eigen::SelfAdjointEigenSolver<Mat> es(gram);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * gram.trace());
  CHECK(m.cov(Vec::Zero(2), sites[0]).norm() == 0.0);
}

TEST_CASE("operator scaling law, exponentially tempered field") {
  const auto s1 = IsotropicGaussianSpec::make(IsoVariant::ITOFBF, 1, 0.8, h2());
  for (double c : {0.5, 2.0, 4.0}) {
    const auto sc = IsotropicGaussianSpec::make(IsoVariant::ITOFBF, 1, 0.8 * c, h2());
    const Mat ch = matfun::matrix_power(h2(), c);
    for (auto [x, y] : {std::pair{0.3, 1.1}, std::pair{-0.7, 0.4}, std::pair{1.5, 1.5}}) {
      const Mat lhs = itofbf_cov(s1, point(c * x), point(c * y));
      const Mat rhs = ch * itofbf_cov(sc, point(x), point(y)) * ch.transpose();
      CHECK(rel(lhs, rhs) < 1e-7);
    }
  }
}

TEST_CASE("operator scaling law, Bessel-tempered field: exponent 2H - d/2") {
  for (int d : {1, 2}) {
    const Mat h = h2() + 0.5 * d * Mat::Identity(2, 2);
    const auto s1 = IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, d, 0.8, h);
    for (double c : {0.5, 2.0}) {
      const auto sc = IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, d, 0.8 * c, h);
      const Mat m = matfun::matrix_power(Mat(2.0 * h - 0.5 * d * Mat::Identity(2, 2)), c);
      Vec x = Vec::Constant(d, 0.3), y = Vec::Constant(d, -0.9);
      y(0) = 1.2;
      const Mat lhs = ibtofbf_cov(s1, Vec(c * x), Vec(c * y));
      const Mat rhs = m * ibtofbf_cov(sc, x, y) * m.transpose();
      CAPTURE(d);
      CAPTURE(c);
      CHECK(rel(lhs, rhs) < 1e-10);
    }
  }
}

TEST_CASE("increment covariance matches differenced variances") {
  for (IsoVariant v : {IsoVariant::IBTOFBF, IsoVariant::ITOFBF}) {
    const auto s = IsotropicGaussianSpec::make(v, 1, 0.5, scalar(0.7));
    const CovarianceModel m(s, v == IsoVariant::IBTOFBF ? Method::ClosedForm : Method::KernelQuadrature);
    auto var = [&](double r) { return r == 0.0 ? 0.0 : m.variance(r)(0, 0); };
    for (double k : {1.0, 2.0, 3.0, 5.0, 8.0}) {
      const double expect = 0.5 * (var(k + 1.0) + var(k - 1.0) - 2.0 * var(k));
      CHECK(increment_covariance(m, k)(0, 0) == doctest::Approx(expect).epsilon(1e-6).scale(1e-9));
    }
    CHECK(increment_covariance(m, 0.0)(0, 0) == doctest::Approx(var(1.0)).epsilon(1e-9));
  }
  // Large lags keep relative precision and decay like e^{-lambda k}.
  const auto s = IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, 1, 1.0, scalar(0.7));
  const CovarianceModel m(s, Method::ClosedForm);
  const double g40 = increment_covariance(m, 40.0)(0, 0), g50 = increment_covariance(m, 50.0)(0, 0);
  CHECK(g40 != 0.0);
  CHECK(std::log(std::abs(g50 / g40)) / 10.0 == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("kernel covariance of a d = 1 MA field equals the isotropic covariance") {
  const auto field = kernels::make_field_spec(kernels::Flavor::MA, 0.5, scalar(1.0), scalar(0.7),
                                              aniso::PhiVariant::Euclidean, kernels::MeasureSpec::gaussian());
  const KernelCovariance kc(field);
  const auto iso = IsotropicGaussianSpec::make(IsoVariant::ITOFBF, 1, 0.5, scalar(0.7));
  for (auto [x, y] : {std::pair{1.0, 0.4}, std::pair{-0.5, 2.0}}) {
    CHECK(kc.cov(point(x), point(y))(0, 0) == doctest::Approx(itofbf_cov(iso, point(x), point(y))(0, 0)).epsilon(1e-7));
  }
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, 1, -1.0, scalar(0.7)), Error);
  CHECK_THROWS_AS(IsotropicGaussianSpec::make(IsoVariant::IBTOFBF, 2, 1.0, scalar(0.4)), Error);
  CHECK(iso_variant_from_name(iso_variant_name(IsoVariant::ITOFBF)) == IsoVariant::ITOFBF);
  CHECK(method_from_name(method_name(Method::KernelQuadrature)) == Method::KernelQuadrature);
}
