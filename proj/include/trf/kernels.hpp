// Field specifications, moving-average and harmonizable kernels, the
// tempered fractional stable motion kernel, and existence checks.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "trf/aniso.hpp"
#include "trf/common.hpp"
#include "trf/matfun.hpp"

namespace trf::kernels {

using matfun::MatrixExponent;

enum class Flavor { MA, MA_B, H };
const char* flavor_name(Flavor f);
Flavor flavor_from_name(const std::string& name);

enum class MeasureVariant { Gaussian, SaS };

struct MeasureSpec {
  MeasureVariant variant = MeasureVariant::Gaussian;
  std::vector<double> alpha;  // one stability index per coordinate (SaS only)

  static MeasureSpec gaussian() { return {}; }
  static MeasureSpec sas(std::vector<double> alpha) { return {MeasureVariant::SaS, std::move(alpha)}; }
  // B = diag(1/alpha_i) for SaS, I/2 for Gaussian.
  Mat b_matrix(int n) const;
};

struct FieldSpec {
  Flavor flavor = Flavor::MA;
  int d = 1;
  int n = 1;
  double lambda = 1.0;
  MatrixExponent E;
  MatrixExponent H;
  aniso::EHomogeneousFn phi;  // E-homogeneous (MA, MA_B) or E^T-homogeneous (H)
  MeasureSpec measure;
  bool commuting = true;  // declares HB = BH

  double q() const { return E.entries().trace(); }
  Mat b_matrix() const { return measure.b_matrix(n); }
  // Checks structural invariants; throws Error(Schema) naming the offending field
  // with a JSON pointer such as "/lambda".
  void validate() const;
};

FieldSpec make_field_spec(Flavor flavor, double lambda, const Mat& e, const Mat& h,
                          aniso::PhiVariant phi, MeasureSpec measure, double rho = 0.0,
                          bool commuting = true);

// Precomputes the exponents used by the kernels of one field.
class KernelEvaluator {
 public:
  explicit KernelEvaluator(const FieldSpec& spec);

  const FieldSpec& spec() const { return spec_; }
  // H - qB.
  const MatrixExponent& shifted() const { return shifted_; }

  // Single terms f(z) of the kernels, f(x - y) - f(-y).
  Mat ma_term(const Vec& z) const;
  Mat mab_term(const Vec& z) const;

  Mat ma(const Vec& x, const Vec& y) const;
  Mat mab(const Vec& x, const Vec& y) const;
  // Moving-average kernel of the spec's flavor (MA or MA_B).
  Mat time_kernel(const Vec& x, const Vec& y) const;
  // (e^{-i<x,xi>} - 1)(lambda + phi(xi))^{-H}(lambda + phi(xi))^{-qB}.
  CMat h(const Vec& x, const Vec& xi) const;
  // (lambda + phi(xi))^{-H}(lambda + phi(xi))^{-qB}.
  Mat h_density(const Vec& xi) const;

 private:
  FieldSpec spec_;
  MatrixExponent shifted_;
  MatrixExponent qb_;
};

Mat ma_kernel(const FieldSpec& spec, const Vec& x, const Vec& y);
Mat mab_kernel(const FieldSpec& spec, const Vec& x, const Vec& y);
CMat h_kernel(const FieldSpec& spec, const Vec& x, const Vec& xi);

// (t - y)_+^{H - 1/alpha} e^{-lambda (t - y)_+} - (-y)_+^{H - 1/alpha} e^{-lambda (-y)_+};
// s_+^b is 0 for s < 0, and for s = 0 when b > 0.
double tfsm_kernel(double h, double alpha, double lambda, double t, double y);
// int |tfsm_kernel(h, alpha, lambda, t, y)|^alpha dy by quadrature; the
// log-characteristic exponent of the stable motion at time t.
double tfsm_lalpha_norm(double h, double alpha, double lambda, double t, double rel_tol = 1e-11);

struct ExistenceReport {
  bool ok = true;
  std::map<std::string, double> margins;
  std::vector<std::string> failures;
};

// Margins of the sufficient existence conditions; a margin must be > 0.
ExistenceReport existence_check(const FieldSpec& spec);

}  // namespace trf::kernels
