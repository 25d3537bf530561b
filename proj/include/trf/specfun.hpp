// Scalar special functions: Gamma, Beta, modified Bessel K, Bessel J and
// the Gauss hypergeometric function on the non-positive real axis.
#pragma once

#include "trf/common.hpp"

namespace trf::specfun {

double gamma(double x);
cdouble gamma(cdouble z);
// Reciprocal Gamma; exactly zero at the poles.
double rgamma(double x);
double log_gamma(double x);  // x > 0
double beta(double a, double b);

struct BesselKResult {
  double value = 0.0;
  bool underflow = false;  // true when u > 700 and the value was flushed to zero
};

// K_nu(u) for real order and u > 0.
BesselKResult bessel_k_checked(double nu, double u);
double bessel_k(double nu, double u);
// e^u K_nu(u); finite for every u > 0.
double bessel_k_scaled(double nu, double u);
// Trapezoid evaluation of e^u K_nu(u) = int_0^inf e^{-u(cosh t - 1)} cosh(nu t) dt.
// Valid for any u > 0 and complex order.
cdouble bessel_k_scaled_quadrature(cdouble nu, double u);
cdouble bessel_k(cdouble nu, double u);

// J_nu(u) for nu in [-1/2, 4] and u >= 0.
double bessel_j(double nu, double u);

struct SeriesResult {
  double value = 0.0;
  int terms = 0;
  bool converged = false;
};

// Direct Gauss series with compensated summation; |z| < 1.
SeriesResult hyp2f1_series(double a, double b, double c, double z, int max_terms = 100000);

enum class PfaffForm { A, B };
// (1-z)^{-a} F(a, c-b; c; z/(z-1)) or (1-z)^{-b} F(c-a, b; c; z/(z-1)), z <= 0,
// with the inner function summed as a plain series in w = z/(z-1).
SeriesResult hyp2f1_pfaff(double a, double b, double c, double z, PfaffForm form,
                          int max_terms = 100000);

// Production evaluator for z <= 0 (and 0 <= z <= 0.9 by direct series).
double hyp2f1(double a, double b, double c, double z);

}  // namespace trf::specfun
