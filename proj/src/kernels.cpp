#include "trf/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "trf/quadrature.hpp"
#include "trf/specfun.hpp"

namespace trf::kernels {

namespace {

[[noreturn]] void schema(const std::string& pointer, const std::string& what) {
  fail(ErrorCode::Schema, pointer + ": " + what);
}

bool is_zero(const Mat& m) { return m.isZero(0.0); }

}  // namespace

const char* flavor_name(Flavor f) {
  switch (f) {
    case Flavor::MA: return "MA";
    case Flavor::MA_B: return "MA_B";
    case Flavor::H: return "H";
  }
  return "?";
}

Flavor flavor_from_name(const std::string& name) {
  if (name == "MA") return Flavor::MA;
  if (name == "MA_B") return Flavor::MA_B;
  if (name == "H") return Flavor::H;
  schema("/flavor", "unknown flavor '" + name + "'");
}

Mat MeasureSpec::b_matrix(int n) const {
  if (variant == MeasureVariant::Gaussian) return 0.5 * Mat::Identity(n, n);
  require(static_cast<int>(alpha.size()) == n, ErrorCode::Schema,
          "/measure/alpha: needs one stability index per coordinate");
  Mat b = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) b(i, i) = 1.0 / alpha[i];
  return b;
}

void FieldSpec::validate() const {
  if (d < 1) schema("/d", "must be >= 1");
  if (n < 1) schema("/n", "must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) schema("/lambda", "must be a positive finite number");
  if (E.dim() != d) schema("/E", "must be d x d");
  if (H.dim() != n) schema("/H", "must be n x n");
  if (!(E.varpi() > 0.0)) schema("/E", "needs eigenvalues with positive real parts");
  if (!(H.varpi() > 0.0)) schema("/H", "needs eigenvalues with positive real parts");
  if (phi.dim() != d) schema("/phi", "dimension differs from d");
  const Mat& pe = phi.exponent().entries();
  const Mat expect = flavor == Flavor::H ? Mat(E.entries().transpose()) : E.entries();
  if ((pe - expect).norm() > 1e-12 * std::max(1.0, expect.norm())) {
    schema("/phi", flavor == Flavor::H ? "must be homogeneous for E^T" : "must be homogeneous for E");
  }
  if (phi.variant() == aniso::PhiVariant::PositivePart && flavor != Flavor::MA) {
    schema("/phi/variant", "positive_part is only available for the MA flavor");
  }
  if (measure.variant == MeasureVariant::SaS) {
    if (static_cast<int>(measure.alpha.size()) != n) schema("/measure/alpha", "needs n entries");
    for (int i = 0; i < n; ++i) {
      const double a = measure.alpha[i];
      if (!(a > 0.0 && a <= 2.0)) schema("/measure/alpha/" + std::to_string(i), "must lie in (0, 2]");
    }
  }
  if (commuting) {
    const Mat b = b_matrix();
    const Mat& h = H.entries();
    const double comm = (h * b - b * h).norm();
    if (comm > 1e-12 * std::max(1.0, h.norm() * b.norm())) {
      schema("/commuting", "flag set but H and B do not commute");
    }
  }
}

FieldSpec make_field_spec(Flavor flavor, double lambda, const Mat& e, const Mat& h,
                          aniso::PhiVariant phi, MeasureSpec measure, double rho, bool commuting) {
  FieldSpec s;
  s.flavor = flavor;
  s.d = static_cast<int>(e.rows());
  s.n = static_cast<int>(h.rows());
  s.lambda = lambda;
  s.E = MatrixExponent(e);
  s.H = MatrixExponent(h);
  const MatrixExponent phi_exp = flavor == Flavor::H ? s.E.transpose() : s.E;
  s.phi = aniso::EHomogeneousFn(phi, phi_exp, rho);
  s.measure = std::move(measure);
  s.commuting = commuting;
  s.validate();
  return s;
}

KernelEvaluator::KernelEvaluator(const FieldSpec& spec) : spec_(spec) {
  spec_.validate();
  const Mat qb = spec_.q() * spec_.b_matrix();
  shifted_ = MatrixExponent(Mat(spec_.H.entries() - qb));
  qb_ = MatrixExponent(qb);
}

Mat KernelEvaluator::ma_term(const Vec& z) const {
  const int n = spec_.n;
  const double p = spec_.phi(z);
  if (std::isinf(p)) return Mat::Zero(n, n);
  if (p > 0.0) return std::exp(-spec_.lambda * p) * matfun::matrix_power(shifted_, p);
  if (spec_.phi.variant() == aniso::PhiVariant::PositivePart && z(0) < 0.0) return Mat::Zero(n, n);
  if (shifted_.varpi() > 0.0) return Mat::Zero(n, n);
  if (is_zero(shifted_.entries())) return Mat::Identity(n, n);
  fail(ErrorCode::Singular, "ma_kernel: phi^(H - qB) is singular at phi = 0");
}

Mat KernelEvaluator::mab_term(const Vec& z) const {
  const double p = spec_.phi(z);
  const double lambda = spec_.lambda;
  if (std::isinf(p)) return Mat::Zero(spec_.n, spec_.n);
  if (p > 0.0) {
    const double u = lambda * p;
    if (shifted_.has_jordan()) {
      matfun::StemFunction stem = matfun::StemFunction::custom([u, p](cdouble nu) -> cdouble {
        if (nu.imag() == 0.0) return specfun::bessel_k(nu.real(), u) * std::pow(p, nu.real());
        return specfun::bessel_k(nu, u) * std::exp(nu * std::log(p));
      });
      return matfun::primary_matrix_fn_real(stem, shifted_);
    }
    return matfun::matrix_bessel_k(shifted_.entries(), u) * matfun::matrix_power(shifted_, p);
  }
  if (shifted_.varpi() > 0.0) {
    // K_nu(lambda p) p^nu -> 2^{nu-1} Gamma(nu) lambda^{-nu} as p -> 0 when Re nu > 0.
    matfun::StemFunction limit = matfun::StemFunction::custom([lambda](cdouble nu) -> cdouble {
      const cdouble g = nu.imag() == 0.0 ? cdouble(specfun::gamma(nu.real())) : specfun::gamma(nu);
      return std::exp((nu - 1.0) * std::log(2.0) - nu * std::log(lambda)) * g;
    });
    return matfun::primary_matrix_fn_real(limit, shifted_);
  }
  fail(ErrorCode::Singular, "mab_kernel: K_(H-qB)(lambda phi) phi^(H-qB) is singular at phi = 0");
}

Mat KernelEvaluator::ma(const Vec& x, const Vec& y) const {
  require(x.size() == spec_.d && y.size() == spec_.d, ErrorCode::InvalidArgument, "ma_kernel: dimension mismatch");
  if (x.isZero(0.0)) return Mat::Zero(spec_.n, spec_.n);
  return ma_term(x - y) - ma_term(-y);
}

Mat KernelEvaluator::mab(const Vec& x, const Vec& y) const {
  require(x.size() == spec_.d && y.size() == spec_.d, ErrorCode::InvalidArgument, "mab_kernel: dimension mismatch");
  if (x.isZero(0.0)) return Mat::Zero(spec_.n, spec_.n);
  return mab_term(x - y) - mab_term(-y);
}

Mat KernelEvaluator::time_kernel(const Vec& x, const Vec& y) const {
  switch (spec_.flavor) {
    case Flavor::MA: return ma(x, y);
    case Flavor::MA_B: return mab(x, y);
    case Flavor::H: break;
  }
  fail(ErrorCode::InvalidArgument, "time_kernel: the H flavor has no moving-average kernel");
}

Mat KernelEvaluator::h_density(const Vec& xi) const {
  require(xi.size() == spec_.d, ErrorCode::InvalidArgument, "h_kernel: dimension mismatch");
  const double c = spec_.lambda + spec_.phi(xi);
  return matfun::matrix_power(spec_.H, 1.0 / c) * matfun::matrix_power(qb_, 1.0 / c);
}

CMat KernelEvaluator::h(const Vec& x, const Vec& xi) const {
  require(x.size() == spec_.d, ErrorCode::InvalidArgument, "h_kernel: dimension mismatch");
  const cdouble factor = std::polar(1.0, -x.dot(xi)) - 1.0;
  return factor * h_density(xi).cast<cdouble>();
}

Mat ma_kernel(const FieldSpec& spec, const Vec& x, const Vec& y) { return KernelEvaluator(spec).ma(x, y); }

Mat mab_kernel(const FieldSpec& spec, const Vec& x, const Vec& y) { return KernelEvaluator(spec).mab(x, y); }

CMat h_kernel(const FieldSpec& spec, const Vec& x, const Vec& xi) { return KernelEvaluator(spec).h(x, xi); }

double tfsm_kernel(double h, double alpha, double lambda, double t, double y) {
  require(h > 0.0 && h < 1.0, ErrorCode::InvalidArgument, "tfsm_kernel: H must lie in (0, 1)");
  require(alpha > 0.0 && alpha <= 2.0, ErrorCode::InvalidArgument, "tfsm_kernel: alpha must lie in (0, 2]");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "tfsm_kernel: lambda must be >= 0");
  const double b = h - 1.0 / alpha;
  auto term = [&](double s) {
    if (s < 0.0) return 0.0;
    if (s == 0.0) {
      if (b > 0.0) return 0.0;
      if (b == 0.0) return 1.0;
      fail(ErrorCode::Singular, "tfsm_kernel: singular at the kernel origin");
    }
    return std::pow(s, b) * std::exp(-lambda * s);
  };
  return term(t - y) - term(-y);
}

double tfsm_lalpha_norm(double h, double alpha, double lambda, double t, double rel_tol) {
  if (t == 0.0) return 0.0;
  require(lambda > 0.0 || h < 1.0 / alpha, ErrorCode::InvalidArgument,
          "tfsm_lalpha_norm: the untempered kernel is not in L^alpha for H >= 1/alpha");
  const double b = h - 1.0 / alpha;
  auto p = [&](double s) { return s > 0.0 ? std::pow(s, b) * std::exp(-lambda * s) : 0.0; };
  const double a = std::abs(t);
  // With s = -y (t > 0) the kernel is p(t + s) - p(s) on s > 0 and p(t - y) on 0 < y < t,
  // integrated in s = t - y so the singular end sits at 0. t < 0 is the mirror image.
  // |p(t + s) - p(s)|^alpha has a kink where the two terms cross, hence the extra levels.
  auto outer = [&](double s) { return std::pow(std::abs(p(a + s) - p(s)), alpha); };
  auto inner = [&](double s) { return std::pow(p(s), alpha); };
  quad::Tolerance tol{0.0, rel_tol};
  auto r1 = quad::exp_sinh<double>(outer, 0.0, tol, 14);
  auto r2 = quad::tanh_sinh<double>(inner, 0.0, a, tol);
  if (!r1.converged || !r2.converged) fail(ErrorCode::NotConverged, "tfsm_lalpha_norm: quadrature did not converge");
  return r1.value + r2.value;
}

ExistenceReport existence_check(const FieldSpec& spec) {
  spec.validate();
  ExistenceReport r;
  auto margin = [&](const std::string& name, double value) {
    r.margins[name] = value;
    if (!(value > 0.0)) {
      r.ok = false;
      r.failures.push_back(name);
    }
  };
  margin("lambda", spec.lambda);
  margin("varpi_E", spec.E.varpi());
  margin("varpi_H", spec.H.varpi());
  const Mat b = spec.b_matrix();
  const double q = spec.q();
  const double varpi_b = matfun::MatrixExponent(b).varpi();
  const double varpi_shift = matfun::MatrixExponent(Mat(spec.H.entries() - q * b)).varpi();
  switch (spec.flavor) {
    case Flavor::MA:
      margin("ma", varpi_shift + q * varpi_b);
      break;
    case Flavor::MA_B:
      margin("ma_b", 2.0 * varpi_shift + q * varpi_b);
      break;
    case Flavor::H:
      margin("h", spec.H.varpi());
      break;
  }
  if (spec.flavor != Flavor::H) {
    // Largest delta with varpi_(H-qB) (1/varpi_B + delta) + q > 0.
    const double delta = varpi_shift >= 0.0 ? std::numeric_limits<double>::infinity()
                                            : q / (-varpi_shift) - 1.0 / varpi_b;
    margin("integrability_delta", delta);
  }
  return r;
}

}  // namespace trf::kernels
