#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <unsupported/Eigen/MatrixFunctions>
#include <unsupported/Eigen/Polynomials>

#include "trf/matfun.hpp"
#include "trf/specfun.hpp"

using namespace trf;
using namespace trf::matfun;

namespace {

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Mat random_matrix(std::mt19937_64& g, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = u(g);
  return m;
}

// Well-conditioned P diag(v) P^{-1} with the given eigenvalues.
Mat with_eigenvalues(std::mt19937_64& g, const Vec& v) {
  const int n = static_cast<int>(v.size());
  Mat p = Mat::Identity(n, n) + 0.4 * random_matrix(g, n);
  return p * v.asDiagonal() * p.inverse();
}

}  // namespace

TEST_CASE("matrix_power: c = 1 and scalar exponents") {
  std::mt19937_64 g(1);
  const Mat m = random_matrix(g, 3);
  CHECK(rel(matrix_power(MatrixExponent(m), 1.0), Mat::Identity(3, 3)) < 1e-14);
  Mat a(1, 1);
  a(0, 0) = 0.37;
  CHECK(matrix_power(MatrixExponent(a), 5.5)(0, 0) == doctest::Approx(std::pow(5.5, 0.37)).epsilon(1e-14));
}

TEST_CASE("matrix_power: Jordan block gives the log fill") {
  const double theta = 0.6, z = 3.2;
  CMat p = CMat::Identity(2, 2);
  const auto e = MatrixExponent::from_jordan(p, {{cdouble(theta, 0.0), 2}});
  Mat expect(2, 2);
  expect << std::pow(z, theta), 0.0, std::log(z) * std::pow(z, theta), std::pow(z, theta);
  CHECK(rel(matrix_power(e, z), expect) < 1e-13);
}

TEST_CASE("matrix_power: group law and inverse") {
  std::mt19937_64 g(2);
  for (int trial = 0; trial < 5; ++trial) {
    const MatrixExponent e(random_matrix(g, 3));
    CHECK(rel(matrix_power(e, 0.7 * 3.1), matrix_power(e, 0.7) * matrix_power(e, 3.1)) < 1e-10);
    for (double c : {0.1, 2.0, 17.0}) {
      CHECK(rel(matrix_power(e, c) * matrix_power(e, 1.0 / c), Mat::Identity(3, 3)) < 1e-10);
    }
  }
}

TEST_CASE("matrix_power agrees with Eigen's matrix exponential") {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat m = random_matrix(g, 3);
    const double c = 0.2 + trial;
    const Mat oracle = (std::log(c) * m).exp();
    CHECK(rel(matrix_power(MatrixExponent(m), c), oracle) < 1e-10);
  }
}

TEST_CASE("matrix_power rejects non-positive bases") {
  const MatrixExponent e(Mat::Identity(2, 2));
  CHECK_THROWS_AS(matrix_power(e, 0.0), Error);
  CHECK_THROWS_AS(matrix_power(e, -1.0), Error);
}

TEST_CASE("spectral_bounds") {
  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 0.3, 0.7;
  auto b = spectral_bounds(d);
  CHECK(b.varpi == doctest::Approx(0.3));
  CHECK(b.upsilon == doctest::Approx(0.7));

  Mat rot(2, 2);
  rot << 0, -1, 1, 0;
  b = spectral_bounds(rot);
  CHECK(std::abs(b.varpi) < 1e-14);
  CHECK(std::abs(b.upsilon) < 1e-14);

  // Roots of the characteristic polynomial by Eigen's polynomial solver.
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat m = random_matrix(g, 3);
    const double tr = m.trace();
    const double c1 = 0.5 * (tr * tr - (m * m).trace());
    Eigen::Vector4d coeffs(-m.determinant(), c1, -tr, 1.0);
    Eigen::PolynomialSolver<double, 3> solver(coeffs);
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 3; ++i) {
      lo = std::min(lo, solver.roots()(i).real());
      hi = std::max(hi, solver.roots()(i).real());
    }
    b = spectral_bounds(m);
    CHECK(std::abs(b.varpi - lo) < 1e-8);
    CHECK(std::abs(b.upsilon - hi) < 1e-8);
    CHECK(b.varpi <= b.upsilon);
    // Similarity invariance.
    const Mat p = Mat::Identity(3, 3) + 0.3 * random_matrix(g, 3);
    const auto bs = spectral_bounds(p * m * p.inverse());
    CHECK(std::abs(bs.varpi - b.varpi) < 1e-9);
    CHECK(std::abs(bs.upsilon - b.upsilon) < 1e-9);
  }
}

TEST_CASE("MatrixExponent: bounds and Jordan reconstruction") {
  std::mt19937_64 g(5);
  Vec v(3);
  v << 0.4, 0.9, 1.6;
  const Mat m = with_eigenvalues(g, v);
  const MatrixExponent e(m);
  CHECK(e.varpi() == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(e.upsilon() == doctest::Approx(1.6).epsilon(1e-10));
  REQUIRE(e.has_jordan());
  const auto& jd = e.jordan();
  CMat j = CMat::Zero(3, 3);
  int at = 0;
  for (const auto& blk : jd.blocks) {
    for (int k = 0; k < blk.size; ++k) {
      j(at + k, at + k) = blk.eigenvalue;
      if (k > 0) j(at + k, at + k - 1) = 1.0;
    }
    at += blk.size;
  }
  const Mat back = (jd.P * j * jd.Pinv).real();
  CHECK(rel(back, m) < 1e-10);
}

TEST_CASE("primary_matrix_fn: diagonal, Jordan block and similarity") {
  const auto square = StemFunction::custom([](cdouble z) { return z * z; },
                                           [](cdouble z, int k) -> cdouble {
                                             if (k == 0) return z * z;
                                             if (k == 1) return 2.0 * z;
                                             if (k == 2) return 2.0;
                                             return 0.0;
                                           });
  Vec dv(2);
  dv << 2.0, 3.0;
  const Mat sq = primary_matrix_fn_real(square, MatrixExponent::diagonal(dv));
  CHECK(sq(0, 0) == doctest::Approx(4.0));
  CHECK(sq(1, 1) == doctest::Approx(9.0));
  CHECK(std::abs(sq(0, 1)) < 1e-14);

  // exp on a Jordan block at theta, derivative by the Cauchy integral.
  const double theta = 0.4;
  const auto ex = StemFunction::custom([](cdouble z) { return std::exp(z); });
  const auto jb = MatrixExponent::from_jordan(CMat::Identity(2, 2), {{cdouble(theta, 0.0), 2}});
  const Mat fj = primary_matrix_fn_real(ex, jb);
  CHECK(fj(0, 0) == doctest::Approx(std::exp(theta)).epsilon(1e-12));
  CHECK(fj(1, 0) == doctest::Approx(std::exp(theta)).epsilon(1e-9));
  CHECK(std::abs(fj(0, 1)) < 1e-14);

  std::mt19937_64 g(6);
  Vec v(3);
  v << 0.3, 0.8, 1.4;
  const Mat m = with_eigenvalues(g, v);
  const Mat p = Mat::Identity(3, 3) + 0.3 * random_matrix(g, 3);
  const auto h = StemFunction::gamma();
  const Mat a = primary_matrix_fn_real(h, MatrixExponent(Mat(p * m * p.inverse())));
  const Mat b = p * primary_matrix_fn_real(h, MatrixExponent(m)) * p.inverse();
  CHECK(rel(a, b) < 1e-8);
}

TEST_CASE("primary_matrix_fn with c^z matches matrix_power") {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 5; ++trial) {
    Vec v(3);
    v << 0.2 + 0.1 * trial, 0.9, 1.3 + 0.2 * trial;
    const MatrixExponent e(with_eigenvalues(g, v));
    const double c = 0.3 + 1.7 * trial;
    CHECK(rel(primary_matrix_fn_real(StemFunction::power(c), e), matrix_power(Mat(e.entries()), c)) < 1e-9);
  }
}

TEST_CASE("stem derivatives match central differences") {
  const double h = 1e-5;
  std::vector<StemFunction> stems = {StemFunction::power(2.7), StemFunction::bessel_k_order(1.3),
                                     StemFunction::gamma(), StemFunction::cosh(0.8)};
  for (const auto& s : stems) {
    for (double z : {0.35, 0.8, 1.45}) {
      const cdouble fd = (s.value(z + h) - s.value(z - h)) / (2.0 * h);
      const cdouble d = s.derivative(z, 1);
      CHECK(std::abs(d - fd) <= 1e-6 * std::max(1.0, std::abs(d)));
    }
  }
}

TEST_CASE("matrix_bessel_k: scalar cases") {
  Mat n(1, 1);
  n(0, 0) = 0.5;
  CHECK(matrix_bessel_k(n, 2.0)(0, 0) == doctest::Approx(std::sqrt(M_PI / 4.0) * std::exp(-2.0)).epsilon(1e-12));
  for (double u : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0, 25.0, 50.0}) {
    for (double nu : {0.0, 0.3, 1.2, 2.7}) {
      n(0, 0) = nu;
      CHECK(matrix_bessel_k(n, u)(0, 0) == doctest::Approx(specfun::bessel_k(nu, u)).epsilon(1e-10));
    }
  }
  // Small-argument law K_nu(u) ~ 2^{nu-1} Gamma(nu) u^{-nu}.
  n(0, 0) = 0.3;
  double last = 0.0;
  for (int k = 3; k <= 8; ++k) {
    const double u = std::pow(10.0, -k);
    const double ratio = matrix_bessel_k(n, u)(0, 0) / (std::pow(2.0, -0.7) * std::tgamma(0.3) * std::pow(u, -0.3));
    CHECK(std::abs(ratio - 1.0) < 0.05);
    if (k > 3) CHECK(std::abs(ratio - 1.0) <= std::abs(last - 1.0) + 1e-12);
    last = ratio;
  }
}

TEST_CASE("matrix_bessel_k: eigenbasis and tempering") {
  std::mt19937_64 g(8);
  Vec v(2);
  v << 0.3, 1.1;
  Mat p = Mat::Identity(2, 2) + 0.4 * random_matrix(g, 2);
  const Mat n = p * v.asDiagonal() * p.inverse();
  for (double u : {0.1, 1.0, 10.0}) {
    Vec k(2);
    k << specfun::bessel_k(0.3, u), specfun::bessel_k(1.1, u);
    CHECK(rel(matrix_bessel_k(n, u), p * k.asDiagonal() * p.inverse()) < 1e-8);
  }
  for (double u : {10.0, 20.0, 40.0}) {
    CHECK(matrix_bessel_k(n, u).cwiseAbs().maxCoeff() <= 10.0 * std::exp(-u / 2.0));
  }
}
