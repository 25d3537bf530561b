#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "trf/kernels.hpp"
#include "trf/specfun.hpp"

using namespace trf;
using namespace trf::kernels;
using aniso::PhiVariant;

namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }
Vec point(double v) { return Vec::Constant(1, v); }
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

FieldSpec scalar_ma(Flavor f, double lambda, double h) {
  return make_field_spec(f, lambda, scalar(1.0), scalar(h), PhiVariant::Euclidean, MeasureSpec::gaussian());
}

}  // namespace

TEST_CASE("scalar MA kernel is the tempered power difference") {
  const double lambda = 0.8, h = 0.7;
  const auto spec = scalar_ma(Flavor::MA, lambda, h);
  auto term = [&](double z) { return z == 0.0 ? 0.0 : std::exp(-lambda * std::abs(z)) * std::pow(std::abs(z), h - 0.5); };
  for (double x : {0.3, 1.0, -2.0}) {
    for (double y : {-3.0, -0.4, 0.2, 0.9, 5.0}) {
      CHECK(ma_kernel(spec, point(x), point(y))(0, 0) == doctest::Approx(term(x - y) - term(-y)).epsilon(1e-13));
    }
  }
  CHECK(ma_kernel(spec, point(0.0), point(1.3))(0, 0) == 0.0);
}

TEST_CASE("scalar MA_B kernel and its limit at the origin") {
  const double lambda = 1.3, h = 0.9;
  const double nu = h - 0.5;
  const auto spec = scalar_ma(Flavor::MA_B, lambda, h);
  auto term = [&](double z) {
    const double a = std::abs(z);
    return std::pow(a, nu) * specfun::bessel_k(nu, lambda * a);
  };
  for (double x : {0.5, 2.0}) {
    for (double y : {-1.5, 0.25, 3.0}) {
      CHECK(mab_kernel(spec, point(x), point(y))(0, 0) == doctest::Approx(term(x - y) - term(-y)).epsilon(1e-11));
    }
  }
  // y = 0 uses the limit 2^{nu - 1} Gamma(nu) lambda^{-nu}; continuity from y = 1e-9.
  const double limit = std::pow(2.0, nu - 1.0) * specfun::gamma(nu) * std::pow(lambda, -nu);
  const double at0 = mab_kernel(spec, point(1.0), point(0.0))(0, 0);
  CHECK(at0 == doctest::Approx(term(1.0) - limit).epsilon(1e-10));
  CHECK(mab_kernel(spec, point(1.0), point(1e-9))(0, 0) == doctest::Approx(at0).epsilon(1e-6));
}

TEST_CASE("MA kernel scaling: f_lambda(c^E x, c^E y) = c^(H - qB) f_(c lambda)(x, y)") {
  Mat e(2, 2), h(2, 2);
  e << 1.0, 0.2, 0.0, 1.4;
  h << 1.6, 0.3, 0.3, 1.9;
  const double lambda = 0.6;
  std::mt19937_64 g(31);
  std::normal_distribution<double> n;
  for (PhiVariant pv : {PhiVariant::Radial}) {
    const auto s1 = make_field_spec(Flavor::MA, lambda, e, h, pv, MeasureSpec::gaussian());
    for (double c : {0.5, 2.5}) {
      const auto sc = make_field_spec(Flavor::MA, c * lambda, e, h, pv, MeasureSpec::gaussian());
      const Mat ce = matfun::matrix_power(e, c);
      const Mat shift = matfun::matrix_power(Mat(h - e.trace() * 0.5 * Mat::Identity(2, 2)), c);
      for (int i = 0; i < 5; ++i) {
        const Vec x = v2(n(g), n(g)), y = v2(n(g), n(g));
        const Mat lhs = ma_kernel(s1, Vec(ce * x), Vec(ce * y));
        const Mat rhs = shift * ma_kernel(sc, x, y);
        CHECK(rel(lhs, rhs) < 1e-9);
      }
    }
  }
}

TEST_CASE("harmonizable density") {
  const double lambda = 0.4, h = 0.8;
  const auto spec = make_field_spec(Flavor::H, lambda, scalar(1.0), scalar(h), PhiVariant::Euclidean,
                                    MeasureSpec::gaussian());
  const KernelEvaluator ev(spec);
  for (double xi : {-3.0, 0.0, 0.5, 7.0}) {
    const double expect = std::pow(lambda + std::abs(xi), -(h + 0.5));
    CHECK(ev.h_density(point(xi))(0, 0) == doctest::Approx(expect).epsilon(1e-13));
    const cdouble hv = h_kernel(spec, point(1.5), point(xi))(0, 0);
    CHECK(std::abs(hv - (std::polar(1.0, -1.5 * xi) - 1.0) * expect) < 1e-13);
  }
}

TEST_CASE("TFSM kernel") {
  CHECK(tfsm_kernel(0.7, 1.5, 0.3, 1.0, 2.0) == 0.0);
  const double b = 0.7 - 1.0 / 1.5;
  CHECK(tfsm_kernel(0.7, 1.5, 0.3, 1.0, 0.5) == doctest::Approx(std::pow(0.5, b) * std::exp(-0.15)).epsilon(1e-14));
  CHECK(tfsm_kernel(0.7, 1.5, 0.3, 1.0, -1.0) ==
        doctest::Approx(std::pow(2.0, b) * std::exp(-0.6) - std::exp(-0.3)).epsilon(1e-14));
  CHECK_THROWS_AS(tfsm_kernel(1.2, 1.5, 0.3, 1.0, 0.5), Error);

  // L^alpha norms against mpmath (tests/oracles/mp_reference.py).
  CHECK(tfsm_lalpha_norm(0.7, 1.5, 0.3, 1.0) == doctest::Approx(1.0297973126560560736).epsilon(1e-9));
  CHECK(tfsm_lalpha_norm(0.4, 1.2, 1.0, 2.0) == doctest::Approx(3.2412652038371067611).epsilon(1e-9));
  CHECK(tfsm_lalpha_norm(0.7, 1.5, 0.3, -1.0) == doctest::Approx(tfsm_lalpha_norm(0.7, 1.5, 0.3, 1.0)).epsilon(1e-9));
  CHECK(tfsm_lalpha_norm(0.7, 1.5, 0.3, 0.0) == 0.0);

  // Scaling: ||k_lambda(c t, .)||^alpha = c^{alpha H} ||k_{c lambda}(t, .)||^alpha.
  for (double c : {0.5, 3.0}) {
    CHECK(tfsm_lalpha_norm(0.7, 1.5, 0.3, c) ==
          doctest::Approx(std::pow(c, 1.5 * 0.7) * tfsm_lalpha_norm(0.7, 1.5, 0.3 * c, 1.0)).epsilon(1e-8));
  }
}

TEST_CASE("existence_check margins") {
  auto r = existence_check(scalar_ma(Flavor::MA, 1.0, 0.7));
  CHECK(r.ok);
  CHECK(r.margins.at("ma") == doctest::Approx(0.7));
  CHECK(r.margins.at("lambda") == doctest::Approx(1.0));

  const auto bad = make_field_spec(Flavor::MA_B, 1.0, Mat::Identity(2, 2), 0.4 * Mat::Identity(2, 2),
                                   PhiVariant::Euclidean, MeasureSpec::gaussian());
  r = existence_check(bad);
  CHECK_FALSE(r.ok);
  CHECK(r.margins.at("ma_b") == doctest::Approx(-0.2));
  REQUIRE(r.failures.size() >= 1);
  CHECK(std::find(r.failures.begin(), r.failures.end(), "ma_b") != r.failures.end());

  const auto hspec = make_field_spec(Flavor::H, 0.5, scalar(1.0), scalar(0.3), PhiVariant::Euclidean,
                                     MeasureSpec::gaussian());
  r = existence_check(hspec);
  CHECK(r.ok);
  CHECK(r.margins.count("integrability_delta") == 0);

  // SaS: B = diag(1/alpha).
  const auto sas = make_field_spec(Flavor::MA, 1.0, scalar(1.0), scalar(0.5), PhiVariant::Euclidean,
                                   MeasureSpec::sas({1.5}));
  r = existence_check(sas);
  CHECK(r.margins.at("ma") == doctest::Approx(0.5));
}

TEST_CASE("validation names the offending field") {
  try {
    (void)scalar_ma(Flavor::MA, -1.0, 0.7);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    CHECK(std::string(e.what()).find("/lambda") != std::string::npos);
  }
  CHECK_THROWS_AS(make_field_spec(Flavor::MA, 1.0, Mat::Identity(2, 3), scalar(0.5), PhiVariant::Euclidean,
                                  MeasureSpec::gaussian()),
                  Error);
  CHECK_THROWS_AS(make_field_spec(Flavor::MA, 1.0, scalar(1.0), scalar(0.5), PhiVariant::Euclidean,
                                  MeasureSpec::sas({1.5, 1.2})),
                  Error);
}
