// Matrix functions of real square matrices: real powers c^M, spectral
// bounds, primary matrix functions through Jordan data, and the matrix
// modified Bessel function of the second kind.
#pragma once

#include <functional>
#include <vector>

#include "trf/common.hpp"

namespace trf::matfun {

// One block of the lower-triangular Jordan form: eigenvalue on the diagonal,
// ones on the first subdiagonal.
struct JordanBlock {
  cdouble eigenvalue;
  int size = 1;
};

// M = P J Pinv.
struct JordanData {
  CMat P;
  CMat Pinv;
  std::vector<JordanBlock> blocks;
};

// A real square matrix used as an exponent, with its spectrum, the bounds
// varpi = min Re(eig) and upsilon = max Re(eig), and (when available) a
// Jordan decomposition. Diagonal, symmetric and numerically diagonalizable
// matrices get their decomposition automatically; defective matrices need
// from_jordan().
class MatrixExponent {
 public:
  MatrixExponent() = default;
  explicit MatrixExponent(const Mat& entries);
  static MatrixExponent from_jordan(const CMat& P, std::vector<JordanBlock> blocks);
  static MatrixExponent scalar(double a, int dim);
  static MatrixExponent diagonal(const Vec& diag);

  const Mat& entries() const { return entries_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  const std::vector<cdouble>& spectrum() const { return spectrum_; }
  double varpi() const { return varpi_; }
  double upsilon() const { return upsilon_; }
  bool has_jordan() const { return has_jordan_; }
  const JordanData& jordan() const;
  bool is_diagonal() const { return diagonal_; }
  // Returns a when the matrix equals a * I exactly; NaN otherwise.
  double scalar_value() const { return scalar_; }

  MatrixExponent transpose() const;

 private:
  void set_bounds();

  Mat entries_;
  std::vector<cdouble> spectrum_;
  double varpi_ = 0.0;
  double upsilon_ = 0.0;
  bool has_jordan_ = false;
  bool diagonal_ = false;
  double scalar_ = 0.0;
  JordanData jordan_;
};

Mat expm(const Mat& a);
CMat expm(const CMat& a);

// c^M = exp(log(c) M) for c > 0.
Mat matrix_power(const MatrixExponent& m, double c);
Mat matrix_power(const Mat& m, double c);

struct SpectralBounds {
  double varpi;
  double upsilon;
};
SpectralBounds spectral_bounds(const Mat& m);

// Scalar stem function h with its derivatives, applied to matrices through
// the Jordan form. Derivatives come from closed forms when known and from a
// Cauchy integral on a circle otherwise.
class StemFunction {
 public:
  using Fn = std::function<cdouble(cdouble)>;
  using Derivative = std::function<cdouble(cdouble, int)>;
  using Radius = std::function<double(cdouble)>;

  static StemFunction power(double c);         // z -> c^z
  static StemFunction bessel_k_order(double u);  // z -> K_z(u)
  static StemFunction gamma();                 // z -> Gamma(z)
  static StemFunction cosh(double t);          // z -> cosh(z t)
  static StemFunction custom(Fn value, Derivative derivative = {}, bool analytic = true,
                             Radius radius = {});

  cdouble value(cdouble z) const { return value_(z); }
  // k-th derivative at z.
  cdouble derivative(cdouble z, int k) const;
  bool analytic() const { return analytic_; }

 private:
  Fn value_;
  Derivative derivative_;
  Radius radius_;
  bool analytic_ = true;
};

CMat primary_matrix_fn(const StemFunction& h, const MatrixExponent& m);
// Real part of primary_matrix_fn; fails when the imaginary part is not negligible.
Mat primary_matrix_fn_real(const StemFunction& h, const MatrixExponent& m);

// K_N(u) = int_0^inf e^{-u cosh t} cosh(N t) dt by adaptive quadrature of the
// scaled integrand. The scaled variant returns e^u K_N(u).
Mat matrix_bessel_k(const Mat& n, double u);
Mat matrix_bessel_k_scaled(const Mat& n, double u);

}  // namespace trf::matfun
