// Covariances of isotropic Gaussian tempered fields (moving-average and
// Bessel-tempered variants) by kernel quadrature, spectral quadrature and
// closed form, plus a kernel-quadrature covariance for general d = 1
// moving-average specifications.
#pragma once

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "trf/common.hpp"
#include "trf/kernels.hpp"

namespace trf::covariance {

enum class IsoVariant {
  ITOFBF,   // isotropic tempered operator fractional Brownian field, kernel e^{-lambda|y|}|y|^{H - d/2}
  IBTOFBF,  // Bessel-tempered variant, spectral density (lambda^2 + |xi|^2)^{-H}
};
const char* iso_variant_name(IsoVariant v);
IsoVariant iso_variant_from_name(const std::string& name);

struct IsotropicGaussianSpec {
  IsoVariant variant = IsoVariant::ITOFBF;
  int d = 1;
  int n = 1;
  double lambda = 1.0;
  Mat H;
  // H = P diag(h) Pinv with h ascending; Q = Pinv Pinv^T.
  Mat P, Pinv, Q;
  Vec h;

  static IsotropicGaussianSpec make(IsoVariant variant, int d, double lambda, const Mat& h);
  void validate() const;
};

enum class Method { ClosedForm, SpectralIntegral, KernelQuadrature };
const char* method_name(Method m);
Method method_from_name(const std::string& name);

// Covariance interface consumed by the exact sampler.
class CovarianceFn {
 public:
  virtual ~CovarianceFn() = default;
  virtual int dim() const = 0;
  virtual int components() const = 0;
  // E[X(x) X(x2)^T].
  virtual Mat cov(const Vec& x, const Vec& x2) const = 0;
  // Evaluates and caches whatever cov() will need for these point pairs.
  virtual void prepare(const std::vector<Vec>& points) const {}
};

// Scalar radial building blocks, one entry per eigen-pair (l, l').
// G(r) is the variogram in the eigenbasis: Var X(r e1) = P (Q o G(r)) P^T.
Mat itofbf_variogram_kernel(const IsotropicGaussianSpec& s, double r, double rel_tol = 1e-10);
Mat itofbf_variogram_spectral(const IsotropicGaussianSpec& s, double r, double rel_tol = 1e-10);
Mat ibtofbf_variogram_closed(const IsotropicGaussianSpec& s, double r);
Mat ibtofbf_variogram_spectral(const IsotropicGaussianSpec& s, double r, double rel_tol = 1e-10);
Mat ibtofbf_variogram_kernel(const IsotropicGaussianSpec& s, double r, double rel_tol = 1e-10);

class CovarianceModel : public CovarianceFn {
 public:
  CovarianceModel(IsotropicGaussianSpec spec, Method method, double rel_tol = 1e-10);

  int dim() const override { return spec_.d; }
  int components() const override { return spec_.n; }
  Mat cov(const Vec& x, const Vec& x2) const override;
  void prepare(const std::vector<Vec>& points) const override;
  // Var X(x) for |x| = r.
  Mat variance(double r) const;

  const IsotropicGaussianSpec& spec() const { return spec_; }
  Method method() const { return method_; }

 private:
  Mat variogram(double r) const;
  Mat compute_variogram(double r) const;

  IsotropicGaussianSpec spec_;
  Method method_;
  double rel_tol_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<double, Mat> cache_;
};

Mat itofbf_cov(const IsotropicGaussianSpec& s, const Vec& x, const Vec& x2);
Mat itofbf_cov_spectral(const IsotropicGaussianSpec& s, const Vec& x, const Vec& x2);
// (2 pi)^{-d/2} C_{H,lambda} 2F1((d/2+H)/2, (d/2+H)/2 + 1/2; d/2; -|xi|^2/lambda^2).
Mat itofbf_spectral_density(const IsotropicGaussianSpec& s, const Vec& xi);
Mat ibtofbf_cov(const IsotropicGaussianSpec& s, const Vec& x, const Vec& x2);
// (lambda^2 + |xi|^2)^{-H}.
Mat ibtofbf_spectral_density(const IsotropicGaussianSpec& s, const Vec& xi);

// int e^{-i<xi, u>} (lambda^2 + |xi|^2)^{-s} d xi in R^d as a function of u = |u|; s > d/2.
double bessel_fourier_term(int d, double s, double lambda, double u);

// Cov(X((k + 1) e1) - X(k e1), X(e1) - X(0)) for unit spacing (n x n). The
// Bessel-tempered closed form is evaluated without differencing variograms,
// so the exponentially small values at large k keep full relative precision.
Mat increment_covariance(const CovarianceModel& model, double k);

// Ratio of the Bessel-tempered field's variance at e1 by kernel quadrature to
// the Fourier integral int |e^{i xi_1} - 1|^2 (lambda^2 + |xi|^2)^{-2h} d xi;
// n = 1 only. Equals one when the normalizing constant is consistent.
double ibtofbf_spectral_constant(const IsotropicGaussianSpec& s, double rel_tol = 1e-12);

// E[X(x) X(x2)^T] = int f_x(y) f_x2(y)^T dy for a Gaussian moving-average
// field in d = 1, by quadrature split at the kernel singularities.
class KernelCovariance : public CovarianceFn {
 public:
  explicit KernelCovariance(const kernels::FieldSpec& spec, double rel_tol = 1e-9);
  int dim() const override { return 1; }
  int components() const override { return evaluator_.spec().n; }
  Mat cov(const Vec& x, const Vec& x2) const override;

 private:
  kernels::KernelEvaluator evaluator_;
  double rel_tol_;
};

}  // namespace trf::covariance
