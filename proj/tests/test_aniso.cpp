#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trf/aniso.hpp"
#include "trf/quadrature.hpp"

using namespace trf;
using namespace trf::aniso;

namespace {

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

MatrixExponent diag12() { return MatrixExponent::diagonal(v2(1.0, 2.0)); }

MatrixExponent general_e() {
  Mat e(2, 2);
  e << 1.2, 0.3, -0.2, 0.7;
  return MatrixExponent(e);
}

Vec random_point(std::mt19937_64& g, double scale) {
  std::normal_distribution<double> n;
  return scale * v2(n(g), n(g));
}

}  // namespace

TEST_CASE("norm0 examples") {
  const auto id = MatrixExponent::scalar(1.0, 2);
  CHECK(norm0(v2(3.0, 4.0), id) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(norm0(v2(0.0, 0.0), general_e()) == 0.0);
  // int_0^1 ||t^E x|| dt / t = int_0^1 4 t^2 dt / t = 2 for x = (0, 4), E = diag(1, 2).
  CHECK(norm0(v2(0.0, 4.0), diag12()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("norm0 against a direct quadrature of its defining integral") {
  const auto e = general_e();
  std::mt19937_64 g(11);
  for (int i = 0; i < 10; ++i) {
    const Vec x = random_point(g, 2.0);
    auto f = [&](double t) { return (matfun::matrix_power(e.entries(), t) * x).norm() / t; };
    const auto r = quad::gauss_kronrod<double>(f, 0.0, 1.0, {0.0, 1e-12});
    CHECK(norm0(x, e) == doctest::Approx(r.value).epsilon(1e-9));
  }
}

TEST_CASE("polar_decompose examples") {
  const auto id = MatrixExponent::scalar(1.0, 2);
  auto p = polar_decompose(v2(3.0, 4.0), id);
  CHECK(p.tau == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(p.l(0) == doctest::Approx(0.6).epsilon(1e-10));

  p = polar_decompose(v2(0.0, 4.0), diag12());
  CHECK(p.tau == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(std::abs(p.l(0)) < 1e-12);
  CHECK(p.l(1) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(norm0(p.l, diag12()) == doctest::Approx(1.0).epsilon(1e-10));

  p = polar_decompose(v2(0.0, 0.0), diag12());
  CHECK(p.tau == 0.0);
  CHECK(p.l.norm() == 0.0);
}

TEST_CASE("polar_decompose: scaling and round trip") {
  const auto e = general_e();
  std::mt19937_64 g(12);
  for (int i = 0; i < 2000; ++i) {
    const Vec x = random_point(g, std::exp(std::normal_distribution<double>(0.0, 1.5)(g)));
    const auto p = polar_decompose(x, e);
    const Vec back = matfun::matrix_power(e, p.tau) * p.l;
    CHECK((back - x).norm() <= 1e-8 * std::max(1.0, x.norm()));
    if (i % 100 == 0) {
      const Vec x3 = matfun::matrix_power(e, 3.0) * x;
      CHECK(polar_decompose(x3, e).tau == doctest::Approx(3.0 * p.tau).epsilon(1e-8));
    }
  }
}

TEST_CASE("phi examples") {
  const auto id = MatrixExponent::scalar(1.0, 2);
  CHECK(EHomogeneousFn(PhiVariant::Euclidean, id)(v2(3.0, 4.0)) == doctest::Approx(5.0));
  CHECK(EHomogeneousFn(PhiVariant::Radial, diag12())(v2(0.0, 4.0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(EHomogeneousFn(PhiVariant::DiagPower, id, 2.0)(v2(3.0, 4.0)) == doctest::Approx(5.0));
  CHECK_THROWS_AS(EHomogeneousFn(PhiVariant::Euclidean, diag12()), Error);
}

TEST_CASE("phi is E-homogeneous and positive") {
  std::mt19937_64 g(13);
  std::vector<EHomogeneousFn> phis = {EHomogeneousFn(PhiVariant::Radial, general_e()),
                                      EHomogeneousFn(PhiVariant::DiagPower, diag12(), 2.0),
                                      EHomogeneousFn(PhiVariant::Euclidean, MatrixExponent::scalar(1.0, 2))};
  for (const auto& phi : phis) {
    for (int i = 0; i < 20; ++i) {
      const Vec x = random_point(g, 1.0);
      CHECK(phi(x) > 0.0);
      for (double c : {0.5, 2.0, 9.0}) {
        const Vec cx = matfun::matrix_power(phi.exponent(), c) * x;
        CHECK(phi(cx) == doctest::Approx(c * phi(x)).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("phi extrema") {
  auto ex = EHomogeneousFn(PhiVariant::Euclidean, MatrixExponent::scalar(1.0, 2)).extrema();
  CHECK(ex.min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ex.max == doctest::Approx(1.0).epsilon(1e-9));
  ex = EHomogeneousFn(PhiVariant::Radial, general_e()).extrema();
  CHECK(ex.min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ex.max == doctest::Approx(1.0).epsilon(1e-9));

  // Brute-force sweep of 10^5 sphere points as the oracle.
  const EHomogeneousFn phi(PhiVariant::DiagPower, diag12(), 2.0);
  const auto got = phi.extrema();
  double lo = 1e300, hi = 0.0;
  const int m = 100000;
  for (int k = 0; k < m; ++k) {
    const double a = 2.0 * M_PI * k / m;
    const Vec x = v2(std::cos(a), std::sin(a));
    const double v = phi(x) / polar_decompose(x, diag12()).tau;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(got.min > 0.0);
  CHECK(got.min == doctest::Approx(lo).epsilon(1e-6));
  CHECK(got.max == doctest::Approx(hi).epsilon(1e-6));
}

TEST_CASE("tau bounds and quasi-triangle inequality") {
  // Lemma-style envelopes: log tau against log ||x||_0 stays inside slopes
  // 1/a_1 + delta and 1/a_p - delta with fitted constants.
  const auto e = diag12();
  const double delta = 0.05;
  std::mt19937_64 g(14);
  double c_lo = 1e300, c_hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    Vec x = random_point(g, 1.0);
    const double n0 = norm0(x, e);
    if (n0 == 0.0) continue;
    const double s = std::exp(std::uniform_real_distribution<double>(-6.0, 0.0)(g)) / n0;
    x *= s;
    const double r = norm0(x, e);
    if (r > 1.0) continue;
    const double tau = polar_decompose(x, e).tau;
    c_lo = std::min(c_lo, tau / std::pow(r, 1.0 / 1.0 + delta));
    c_hi = std::max(c_hi, tau / std::pow(r, 1.0 / 2.0 - delta));
  }
  CHECK(c_lo > 0.0);
  CHECK(c_hi < 1e3);

  const EHomogeneousFn tau(PhiVariant::Radial, general_e());
  double k = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec x = random_point(g, 1.0), y = random_point(g, 1.0);
    k = std::max(k, tau(Vec(x + y)) / (tau(x) + tau(y)));
  }
  CHECK(std::isfinite(k));
  CHECK(k < 10.0);
}
