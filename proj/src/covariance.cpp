#include "trf/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <Eigen/Eigenvalues>

#include "trf/quadrature.hpp"
#include "trf/specfun.hpp"

namespace trf::covariance {

namespace {

using Profile = std::function<double(double)>;  // rho -> g(rho), rho > 0

int pair_count(int n) { return n * (n + 1) / 2; }

Mat unpack_pairs(const Vec& v, int n) {
  Mat m(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = v(k++);
  return m;
}

Vec pair_products(const Vec& k) {
  const int n = static_cast<int>(k.size());
  Vec out(pair_count(n));
  int idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out(idx++) = k(i) * k(j);
  return out;
}

// Area of the unit sphere in R^m.
double sphere_area(int m) { return 2.0 * std::pow(kPi, 0.5 * m) / specfun::gamma(0.5 * m); }

template <class R>
Vec checked(const R& r, const char* who) {
  if (!r.converged) fail(ErrorCode::NotConverged, std::string(who) + ": quadrature did not converge");
  return r.value;
}

// int_{R^d} (g_l(|e1 - y|) - g_l(|y|)) (g_l'(|e1 - y|) - g_l'(|y|)) dy for all pairs.
Mat kernel_pair_integrals(const std::vector<Profile>& g, int d, double rel_tol) {
  const int n = static_cast<int>(g.size());
  auto diff = [&](double rho_far, double rho_near) {
    Vec k(n);
    for (int l = 0; l < n; ++l) k(l) = g[l](rho_far) - g[l](rho_near);
    return k;
  };
  quad::Tolerance tol{0.0, rel_tol};
  if (d == 1) {
    // Reflection y -> 1 - y maps k to -k, so integrate over y < 1/2 and double.
    auto inner = [&](double y) -> Vec { return pair_products(diff(1.0 - y, y)); };
    auto outer = [&](double s) -> Vec { return pair_products(diff(1.0 + s, s)); };
    Vec a = checked(quad::tanh_sinh<Vec>(inner, 0.0, 0.5, tol), "kernel quadrature");
    Vec b = checked(quad::exp_sinh<Vec>(outer, 0.0, tol), "kernel quadrature");
    return unpack_pairs(2.0 * (a + b), n);
  }
  // Axial coordinates about e1: y = rho (cos t, sin t w), w on the unit sphere of R^{d-1};
  // again only the half-space y_1 < 1/2 is integrated.
  const double split = 8.0;
  quad::Tolerance inner_tol{0.0, 0.1 * rel_tol};
  auto radial = [&](double c, double s, double rho) -> Vec {
    const double a = 1.0 - rho * c, b = rho * s;
    // Weight folded in before squaring; k alone can overflow when squared near rho = 0.
    return pair_products(diff(std::sqrt(a * a + b * b), rho) * std::pow(rho, 0.5 * (d - 1)));
  };
  auto inner_integral = [&](double theta) -> Vec {
    const double c = std::cos(theta), s = std::sin(theta);
    const double upper = c > 0.0 ? 0.5 / c : std::numeric_limits<double>::infinity();
    auto f = [&](double rho) -> Vec { return radial(c, s, rho); };
    if (upper <= split) return checked(quad::tanh_sinh<Vec>(f, 0.0, upper, inner_tol), "kernel quadrature");
    Vec head = checked(quad::tanh_sinh<Vec>(f, 0.0, split, inner_tol), "kernel quadrature");
    auto logf = [&](double v) -> Vec {
      const double rho = std::exp(v);
      return f(rho) * rho;
    };
    if (std::isinf(upper)) {
      auto tail = [&](double rho) -> Vec { return f(rho); };
      return head + checked(quad::exp_sinh<Vec>(tail, split, inner_tol), "kernel quadrature");
    }
    auto r = quad::gauss_kronrod<Vec>(logf, std::log(split), std::log(upper),
                                      quad::Tolerance{1e-3 * rel_tol * head.norm(), 0.1 * rel_tol});
    return head + r.value;
  };
  auto weighted = [&](double theta) -> Vec {
    return inner_integral(theta) * std::pow(std::sin(theta), d - 2);
  };
  Vec front = checked(quad::tanh_sinh<Vec>(weighted, 0.0, 0.5 * kPi, tol, 8), "kernel quadrature");
  auto back_fn = [&](double t) -> Vec { return weighted(0.5 * kPi + t); };
  Vec back = checked(quad::tanh_sinh<Vec>(back_fn, 0.0, 0.5 * kPi, tol, 8), "kernel quadrature");
  return unpack_pairs(2.0 * sphere_area(d - 1) * (front + back), n);
}

// Zeros of J_nu by McMahon's expansion; adequate as panel breakpoints.
double bessel_zero_estimate(double nu, int k) {
  const double beta = (k + 0.5 * nu - 0.25) * kPi;
  return beta - (4.0 * nu * nu - 1.0) / (8.0 * beta);
}

// Gamma(d/2) (2/t)^{d/2-1} J_{d/2-1}(t): the Fourier transform of the uniform
// measure on the unit sphere, normalized to one at t = 0.
double sphere_ft(int d, double t) {
  if (d == 1) return std::cos(t);
  if (d == 3) return t == 0.0 ? 1.0 : std::sin(t) / t;
  if (t == 0.0) return 1.0;
  const double nu = 0.5 * d - 1.0;
  return specfun::gamma(0.5 * d) * std::pow(2.0 / t, nu) * specfun::bessel_j(nu, t);
}

// 2 S_{d-1} int_0^inf rho^{d-1} f(rho) (1 - sphere_ft(r rho)) d rho for all pairs,
// f = s_l s_l'. This is int |e^{i<xi, r e1>} - 1|^2 s_l s_l' d xi.
Mat spectral_pair_variogram(const std::vector<Profile>& s, int d, double lambda, double r,
                            double rel_tol) {
  const int n = static_cast<int>(s.size());
  if (r == 0.0) return Mat::Zero(n, n);
  const int m = pair_count(n);
  auto dens = [&](double rho) -> Vec {
    Vec v(n);
    for (int l = 0; l < n; ++l) v(l) = s[l](rho);
    return pair_products(v) * std::pow(rho, d - 1);
  };
  const double nu = 0.5 * d - 1.0;
  auto zero = [&](int k) { return bessel_zero_estimate(nu, k) / r; };
  int k0 = 2;
  while (zero(k0) < 10.0 * lambda) ++k0;
  const double rho1 = zero(k0);
  quad::Tolerance tol{0.0, rel_tol};
  // Head: combined integrand panel by panel.
  auto combined = [&](double rho) -> Vec { return dens(rho) * (1.0 - sphere_ft(d, r * rho)); };
  Vec head = Vec::Zero(m);
  double lo = 0.0;
  for (int k = 1; k <= k0; ++k) {
    const double hi = zero(k);
    head += checked(quad::gauss_kronrod<Vec>(combined, lo, hi, quad::Tolerance{0.0, 0.1 * rel_tol}),
                    "spectral quadrature");
    lo = hi;
  }
  Vec flat = checked(quad::exp_sinh<Vec>(dens, rho1, tol), "spectral quadrature");
  auto osc = [&](double rho) -> Vec { return dens(rho) * sphere_ft(d, r * rho); };
  const double scale = std::max(head.norm(), flat.norm());
  auto tail = quad::oscillatory_tail(osc, rho1, [&](int k) { return zero(k0 + k); }, m,
                                     quad::Tolerance{rel_tol * scale * 0.1, rel_tol * 0.1});
  if (!tail.converged) fail(ErrorCode::NotConverged, "spectral quadrature: oscillatory tail did not converge");
  const Vec total = head + flat - tail.value;
  return unpack_pairs(2.0 * sphere_area(d) * total, n);
}

std::vector<Profile> itofbf_profiles(const IsotropicGaussianSpec& s, double lambda) {
  std::vector<Profile> g;
  for (int l = 0; l < s.n; ++l) {
    const double e = s.h(l) - 0.5 * s.d;
    g.push_back([lambda, e](double rho) { return std::exp(-lambda * rho) * std::pow(rho, e); });
  }
  return g;
}

std::vector<Profile> bessel_profiles(const IsotropicGaussianSpec& s, double lambda) {
  std::vector<Profile> g;
  for (int l = 0; l < s.n; ++l) {
    const double nu = s.h(l) - 0.5 * s.d;
    g.push_back([lambda, nu](double rho) {
      const double u = lambda * rho;
      if (u > 700.0) return 0.0;
      return std::pow(rho, nu) * specfun::bessel_k(nu, u);
    });
  }
  return g;
}

double itofbf_constant(int d, double h, double lambda) {
  return std::pow(2.0 * kPi, 0.5 * d) * specfun::gamma(0.5 * d + h) /
         (std::pow(2.0, 0.5 * (d - 2)) * std::pow(lambda, 0.5 * d + h) * specfun::gamma(0.5 * d));
}

// (2 pi)^{-d/2} C_h 2F1(a, a + 1/2; d/2; -rho^2/lambda^2), a = (d/2 + h)/2.
double itofbf_profile_density(int d, double h, double lambda, double rho) {
  const double a = 0.5 * (0.5 * d + h);
  const double t = rho / lambda;
  if (t > 1e100) return 0.0;
  return std::pow(2.0 * kPi, -0.5 * d) * itofbf_constant(d, h, lambda) *
         specfun::hyp2f1(a, a + 0.5, 0.5 * d, -t * t);
}

std::vector<Profile> itofbf_spectral_profiles(const IsotropicGaussianSpec& s) {
  std::vector<Profile> out;
  for (int l = 0; l < s.n; ++l) {
    const double h = s.h(l);
    const int d = s.d;
    const double lambda = s.lambda;
    out.push_back([=](double rho) { return itofbf_profile_density(d, h, lambda, rho); });
  }
  return out;
}

std::vector<Profile> bessel_spectral_profiles(const IsotropicGaussianSpec& s) {
  std::vector<Profile> out;
  for (int l = 0; l < s.n; ++l) {
    const double h = s.h(l);
    const double l2 = s.lambda * s.lambda;
    out.push_back([=](double rho) { return std::pow(l2 + rho * rho, -h); });
  }
  return out;
}

}  // namespace

double bessel_fourier_term(int d, double s, double lambda, double u) {
  if (u == 0.0) {
    return std::pow(kPi, 0.5 * d) * specfun::gamma(s - 0.5 * d) / specfun::gamma(s) *
           std::pow(lambda, d - 2.0 * s);
  }
  const double nu = s - 0.5 * d;
  return std::pow(2.0 * kPi, 0.5 * d) * std::pow(lambda, 0.5 * d - s) * std::pow(u, nu) *
         specfun::bessel_k(nu, lambda * u) / (std::pow(2.0, s - 1.0) * specfun::gamma(s));
}

namespace {

Mat assemble(const IsotropicGaussianSpec& s, const Mat& g) {
  return s.P * s.Q.cwiseProduct(g) * s.P.transpose();
}

double rounded_key(double r) {
  if (r == 0.0) return 0.0;
  const int e = static_cast<int>(std::floor(std::log10(r)));
  const double scale = std::pow(10.0, 12 - e);
  return std::round(r * scale) / scale;
}

}  // namespace

const char* iso_variant_name(IsoVariant v) { return v == IsoVariant::ITOFBF ? "ITOFBF" : "IBTOFBF"; }

IsoVariant iso_variant_from_name(const std::string& name) {
  if (name == "ITOFBF") return IsoVariant::ITOFBF;
  if (name == "IBTOFBF") return IsoVariant::IBTOFBF;
  fail(ErrorCode::Schema, "/variant: unknown isotropic variant '" + name + "'");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::ClosedForm: return "closed_form";
    case Method::SpectralIntegral: return "spectral_integral";
    case Method::KernelQuadrature: return "kernel_quadrature";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "closed_form") return Method::ClosedForm;
  if (name == "spectral_integral") return Method::SpectralIntegral;
  if (name == "kernel_quadrature") return Method::KernelQuadrature;
  fail(ErrorCode::Schema, "/method: unknown covariance method '" + name + "'");
}

IsotropicGaussianSpec IsotropicGaussianSpec::make(IsoVariant variant, int d, double lambda, const Mat& h) {
  IsotropicGaussianSpec s;
  s.variant = variant;
  s.d = d;
  s.n = static_cast<int>(h.rows());
  s.lambda = lambda;
  s.H = h;
  if (h.rows() == 0 || h.rows() != h.cols() || !h.allFinite()) {
    fail(ErrorCode::Schema, "/H: must be a finite square matrix");
  }
  Eigen::EigenSolver<Mat> es(h, true);
  if (es.info() != Eigen::Success) fail(ErrorCode::EigenSolver, "/H: eigensolver failed");
  const CVec vals = es.eigenvalues();
  const CMat vecs = es.eigenvectors();
  const double scale = std::max(1.0, h.norm());
  std::vector<int> order(s.n);
  for (int i = 0; i < s.n; ++i) {
    order[i] = i;
    if (std::abs(vals(i).imag()) > 1e-12 * scale) fail(ErrorCode::Schema, "/H: eigenvalues must be real");
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return vals(a).real() < vals(b).real(); });
  s.h.resize(s.n);
  s.P.resize(s.n, s.n);
  for (int i = 0; i < s.n; ++i) {
    s.h(i) = vals(order[i]).real();
    Vec col = vecs.col(order[i]).real();
    if (col.norm() < 0.5) col = vecs.col(order[i]).imag();
    s.P.col(i) = col.normalized();
  }
  for (int i = 1; i < s.n; ++i) {
    if (s.h(i) - s.h(i - 1) < 1e-8 * scale) fail(ErrorCode::Schema, "/H: eigenvalues must be simple");
  }
  s.Pinv = s.P.inverse();
  s.Q = s.Pinv * s.Pinv.transpose();
  s.validate();
  return s;
}

void IsotropicGaussianSpec::validate() const {
  if (d < 1) fail(ErrorCode::Schema, "/d: must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorCode::Schema, "/lambda: must be positive and finite");
  if (h.size() != n || P.rows() != n) fail(ErrorCode::Schema, "/H: decomposition missing");
  for (int l = 0; l < n; ++l) {
    if (variant == IsoVariant::ITOFBF && !(h(l) > 0.0 && h(l) < 1.0)) {
      fail(ErrorCode::Schema, "/H: eigenvalues must lie in (0, 1)");
    }
    if (variant == IsoVariant::IBTOFBF && !(h(l) > 0.25 * d)) {
      fail(ErrorCode::Schema, "/H: eigenvalues must exceed d/4");
    }
  }
}

Mat itofbf_variogram_kernel(const IsotropicGaussianSpec& s, double r, double rel_tol) {
  if (r == 0.0) return Mat::Zero(s.n, s.n);
  const Mat pairs = kernel_pair_integrals(itofbf_profiles(s, r * s.lambda), s.d, rel_tol);
  Mat g(s.n, s.n);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) g(i, j) = std::pow(r, s.h(i) + s.h(j)) * pairs(i, j);
  return g;
}

Mat itofbf_variogram_spectral(const IsotropicGaussianSpec& s, double r, double rel_tol) {
  return spectral_pair_variogram(itofbf_spectral_profiles(s), s.d, s.lambda, r, rel_tol);
}

Mat ibtofbf_variogram_closed(const IsotropicGaussianSpec& s, double r) {
  Mat g(s.n, s.n);
  for (int i = 0; i < s.n; ++i) {
    for (int j = i; j < s.n; ++j) {
      const double sum = s.h(i) + s.h(j);
      g(i, j) = g(j, i) = r == 0.0 ? 0.0
                                   : 2.0 * (bessel_fourier_term(s.d, sum, s.lambda, 0.0) -
                                            bessel_fourier_term(s.d, sum, s.lambda, r));
    }
  }
  return g;
}

Mat ibtofbf_variogram_spectral(const IsotropicGaussianSpec& s, double r, double rel_tol) {
  return spectral_pair_variogram(bessel_spectral_profiles(s), s.d, s.lambda, r, rel_tol);
}

Mat ibtofbf_variogram_kernel(const IsotropicGaussianSpec& s, double r, double rel_tol) {
  if (r == 0.0) return Mat::Zero(s.n, s.n);
  const Mat pairs = kernel_pair_integrals(bessel_profiles(s, r * s.lambda), s.d, rel_tol);
  Vec c(s.n);
  for (int l = 0; l < s.n; ++l) {
    const double h = s.h(l);
    c(l) = std::pow(s.lambda, 0.5 * s.d - h) / (specfun::gamma(h) * std::pow(2.0, h - 1.0));
  }
  Mat g(s.n, s.n);
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) g(i, j) = c(i) * c(j) * std::pow(r, s.h(i) + s.h(j)) * pairs(i, j);
  return g;
}

CovarianceModel::CovarianceModel(IsotropicGaussianSpec spec, Method method, double rel_tol)
    : spec_(std::move(spec)), method_(method), rel_tol_(rel_tol) {
  spec_.validate();
  if (spec_.variant == IsoVariant::ITOFBF && method_ == Method::ClosedForm) {
    fail(ErrorCode::Unsupported, "ITOFBF has no closed-form covariance; use kernel_quadrature or spectral_integral");
  }
}

Mat CovarianceModel::compute_variogram(double r) const {
  if (spec_.variant == IsoVariant::ITOFBF) {
    return method_ == Method::KernelQuadrature ? itofbf_variogram_kernel(spec_, r, rel_tol_)
                                               : itofbf_variogram_spectral(spec_, r, rel_tol_);
  }
  switch (method_) {
    case Method::ClosedForm: return ibtofbf_variogram_closed(spec_, r);
    case Method::SpectralIntegral: return ibtofbf_variogram_spectral(spec_, r, rel_tol_);
    case Method::KernelQuadrature: return ibtofbf_variogram_kernel(spec_, r, rel_tol_);
  }
  return {};
}

Mat CovarianceModel::variogram(double r) const {
  if (r == 0.0) return Mat::Zero(spec_.n, spec_.n);
  const double key = method_ == Method::ClosedForm ? r : rounded_key(r);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  Mat g = compute_variogram(key);
  std::lock_guard<std::mutex> lock(mutex_);
  cache_.emplace(key, g);
  return g;
}

void CovarianceModel::prepare(const std::vector<Vec>& points) const {
  if (method_ == Method::ClosedForm) return;
  std::set<double> keys;
  for (std::size_t i = 0; i < points.size(); ++i) {
    keys.insert(rounded_key(points[i].norm()));
    for (std::size_t j = i + 1; j < points.size(); ++j) keys.insert(rounded_key((points[i] - points[j]).norm()));
  }
  keys.erase(0.0);
  std::vector<double> todo;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (double k : keys)
      if (!cache_.count(k)) todo.push_back(k);
  }
  std::vector<Mat> values(todo.size());
  parallel_for(todo.size(), [&](std::size_t i) { values[i] = compute_variogram(todo[i]); });
  std::lock_guard<std::mutex> lock(mutex_);
  for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i], values[i]);
}

Mat CovarianceModel::variance(double r) const { return assemble(spec_, variogram(r)); }

Mat CovarianceModel::cov(const Vec& x, const Vec& x2) const {
  require(x.size() == spec_.d && x2.size() == spec_.d, ErrorCode::InvalidArgument, "cov: dimension mismatch");
  const Mat g = 0.5 * (variogram(x.norm()) + variogram(x2.norm()) - variogram((x - x2).norm()));
  return assemble(spec_, g);
}

Mat itofbf_cov(const IsotropicGaussianSpec& s, const Vec& x, const Vec& x2) {
  require(s.variant == IsoVariant::ITOFBF, ErrorCode::InvalidArgument, "itofbf_cov: spec is not ITOFBF");
  return CovarianceModel(s, Method::KernelQuadrature).cov(x, x2);
}

Mat itofbf_cov_spectral(const IsotropicGaussianSpec& s, const Vec& x, const Vec& x2) {
  require(s.variant == IsoVariant::ITOFBF, ErrorCode::InvalidArgument, "itofbf_cov_spectral: spec is not ITOFBF");
  return CovarianceModel(s, Method::SpectralIntegral).cov(x, x2);
}

Mat itofbf_spectral_density(const IsotropicGaussianSpec& s, const Vec& xi) {
  Vec diag(s.n);
  const double rho = xi.norm();
  for (int l = 0; l < s.n; ++l) diag(l) = itofbf_profile_density(s.d, s.h(l), s.lambda, rho);
  return s.P * diag.asDiagonal() * s.Pinv;
}

Mat ibtofbf_cov(const IsotropicGaussianSpec& s, const Vec& x, const Vec& x2) {
  require(s.variant == IsoVariant::IBTOFBF, ErrorCode::InvalidArgument, "ibtofbf_cov: spec is not IBTOFBF");
  return CovarianceModel(s, Method::ClosedForm).cov(x, x2);
}

Mat ibtofbf_spectral_density(const IsotropicGaussianSpec& s, const Vec& xi) {
  Vec diag(s.n);
  const double r2 = s.lambda * s.lambda + xi.squaredNorm();
  for (int l = 0; l < s.n; ++l) diag(l) = std::pow(r2, -s.h(l));
  return s.P * diag.asDiagonal() * s.Pinv;
}

Mat increment_covariance(const CovarianceModel& model, double k) {
  const IsotropicGaussianSpec& s = model.spec();
  require(k >= 0.0, ErrorCode::InvalidArgument, "increment_covariance: lag must be >= 0");
  if (s.variant == IsoVariant::IBTOFBF && model.method() == Method::ClosedForm) {
    // V = 2 (F(0) - F(r)) per eigen-pair, so the second difference of V/2 is -(F(k+1) - 2F(k) + F(|k-1|)).
    Mat g(s.n, s.n);
    for (int i = 0; i < s.n; ++i) {
      for (int j = i; j < s.n; ++j) {
        const double sum = s.h(i) + s.h(j);
        auto f = [&](double u) { return bessel_fourier_term(s.d, sum, s.lambda, u); };
        g(i, j) = g(j, i) = -(f(k + 1.0) - 2.0 * f(k) + f(std::abs(k - 1.0)));
      }
    }
    return assemble(s, g);
  }
  auto var = [&](double r) { return model.variance(r); };
  return 0.5 * (var(k + 1.0) + var(std::abs(k - 1.0)) - 2.0 * var(k));
}

double ibtofbf_spectral_constant(const IsotropicGaussianSpec& s, double rel_tol) {
  require(s.n == 1, ErrorCode::InvalidArgument, "ibtofbf_spectral_constant: needs n = 1");
  const double kernel = ibtofbf_variogram_kernel(s, 1.0, rel_tol)(0, 0);
  const double fourier = ibtofbf_variogram_spectral(s, 1.0, rel_tol)(0, 0);
  return kernel / fourier;
}

KernelCovariance::KernelCovariance(const kernels::FieldSpec& spec, double rel_tol)
    : evaluator_(spec), rel_tol_(rel_tol) {
  require(spec.d == 1, ErrorCode::Unsupported, "KernelCovariance: only d = 1 is supported");
  require(spec.flavor != kernels::Flavor::H, ErrorCode::Unsupported, "KernelCovariance: needs a moving-average flavor");
  require(spec.measure.variant == kernels::MeasureVariant::Gaussian, ErrorCode::InvalidArgument,
          "KernelCovariance: needs a Gaussian measure");
}

Mat KernelCovariance::cov(const Vec& x, const Vec& x2) const {
  const int n = components();
  const double a = x(0), b = x2(0);
  if (a == 0.0 || b == 0.0) return Mat::Zero(n, n);
  const bool bessel = evaluator_.spec().flavor == kernels::Flavor::MA_B;
  auto term = [&](double z) {
    Vec v(1);
    v(0) = z;
    return bessel ? evaluator_.mab_term(v) : evaluator_.ma_term(v);
  };
  // Kernel at y = anchor + sign * t with differences formed exactly.
  auto integrand = [&](double anchor, double sign, double t) -> Vec {
    const Mat fa = term((a - anchor) - sign * t) - term(-anchor - sign * t);
    const Mat fb = term((b - anchor) - sign * t) - term(-anchor - sign * t);
    const Mat prod = fa * fb.transpose();
    return Eigen::Map<const Vec>(prod.data(), n * n);
  };
  std::vector<double> cuts = {0.0, a, b};
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  quad::Tolerance tol{0.0, rel_tol_};
  Vec total = Vec::Zero(n * n);
  auto left = [&](double t) -> Vec { return integrand(cuts.front(), -1.0, t); };
  auto right = [&](double t) -> Vec { return integrand(cuts.back(), 1.0, t); };
  total += checked(quad::exp_sinh<Vec>(left, 0.0, tol), "kernel covariance");
  total += checked(quad::exp_sinh<Vec>(right, 0.0, tol), "kernel covariance");
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double half = 0.5 * (cuts[i + 1] - cuts[i]);
    auto up = [&](double t) -> Vec { return integrand(cuts[i], 1.0, t); };
    auto down = [&](double t) -> Vec { return integrand(cuts[i + 1], -1.0, t); };
    total += checked(quad::tanh_sinh<Vec>(up, 0.0, half, tol), "kernel covariance");
    total += checked(quad::tanh_sinh<Vec>(down, 0.0, half, tol), "kernel covariance");
  }
  return Eigen::Map<const Mat>(total.data(), n, n);
}

}  // namespace trf::covariance
