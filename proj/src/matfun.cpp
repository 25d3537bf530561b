#include "trf/matfun.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "trf/quadrature.hpp"
#include "trf/specfun.hpp"

namespace trf::matfun {

namespace {

void check_square(const Mat& m, const char* who) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    fail(ErrorCode::InvalidArgument, std::string(who) + ": matrix must be square and non-empty");
  }
  if (!m.allFinite()) fail(ErrorCode::InvalidArgument, std::string(who) + ": non-finite entry");
}

bool exactly_diagonal(const Mat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

double condition_number(const CMat& v) {
  Eigen::JacobiSVD<CMat> svd(v);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / s(s.size() - 1);
}

// Higham's scaling and squaring with Pade approximants of degree 3..13.
template <class M>
M expm_impl(const M& a_in) {
  const Eigen::Index n = a_in.rows();
  const M ident = M::Identity(n, n);
  const double norm1 = a_in.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 == 0.0) return ident;
  static const double b3[] = {120, 60, 12, 1};
  static const double b5[] = {30240, 15120, 3360, 420, 30, 1};
  static const double b7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
  static const double b9[] = {17643225600.0, 8821612800.0, 2075673600, 302702400, 30270240,
                              2162160,       110880,       3960,       90,        1};
  static const double b13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
  auto solve = [&](const M& u, const M& v) -> M {
    return (v - u).partialPivLu().solve(v + u);
  };
  auto low_degree = [&](const double* b, int m) -> M {
    const M a2 = a_in * a_in;
    M pow = ident;
    M u_sum = b[1] * ident;
    M v_sum = b[0] * ident;
    for (int k = 2; k <= m; k += 2) {
      pow = pow * a2;
      v_sum += b[k] * pow;
      if (k + 1 <= m) u_sum += b[k + 1] * pow;
    }
    return solve(a_in * u_sum, v_sum);
  };
  if (norm1 <= 1.495585217958292e-2) return low_degree(b3, 3);
  if (norm1 <= 2.539398330063230e-1) return low_degree(b5, 5);
  if (norm1 <= 9.504178996162932e-1) return low_degree(b7, 7);
  if (norm1 <= 2.097847961257068e0) return low_degree(b9, 9);
  const double theta13 = 5.371920351148152;
  int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const M a = a_in * std::ldexp(1.0, -s);
  const M a2 = a * a;
  const M a4 = a2 * a2;
  const M a6 = a4 * a2;
  const M u = a * (a6 * (b13[13] * a6 + b13[11] * a4 + b13[9] * a2) + b13[7] * a6 + b13[5] * a4 +
                   b13[3] * a2 + b13[1] * ident);
  const M v = a6 * (b13[12] * a6 + b13[10] * a4 + b13[8] * a2) + b13[6] * a6 + b13[4] * a4 +
              b13[2] * a2 + b13[0] * ident;
  M r = solve(u, v);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

cdouble cauchy_derivative(const StemFunction::Fn& f, cdouble z, int k, double radius) {
  // f^{(k)}(z) = k!/(2 pi r^k) int f(z + r e^{i t}) e^{-i k t} dt; trapezoid is spectral here.
  const int nodes = 64;
  cdouble acc = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double t = 2.0 * kPi * j / nodes;
    const cdouble w = std::polar(1.0, t);
    acc += f(z + radius * w) * std::polar(1.0, -k * t);
  }
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return acc / double(nodes) * fact / std::pow(radius, k);
}

}  // namespace

MatrixExponent::MatrixExponent(const Mat& m) : entries_(m) {
  check_square(m, "MatrixExponent");
  const Eigen::Index n = m.rows();
  scalar_ = std::numeric_limits<double>::quiet_NaN();
  if (exactly_diagonal(m)) {
    diagonal_ = true;
    has_jordan_ = true;
    jordan_.P = CMat::Identity(n, n);
    jordan_.Pinv = CMat::Identity(n, n);
    bool same = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      jordan_.blocks.push_back({cdouble(m(i, i), 0.0), 1});
      spectrum_.emplace_back(m(i, i), 0.0);
      if (m(i, i) != m(0, 0)) same = false;
    }
    if (same) scalar_ = m(0, 0);
  } else if ((m - m.transpose()).norm() <= 1e-14 * m.norm()) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) fail(ErrorCode::EigenSolver, "MatrixExponent: eigensolver failed");
    has_jordan_ = true;
    jordan_.P = es.eigenvectors().cast<cdouble>();
    jordan_.Pinv = es.eigenvectors().transpose().cast<cdouble>();
    for (Eigen::Index i = 0; i < n; ++i) {
      jordan_.blocks.push_back({cdouble(es.eigenvalues()(i), 0.0), 1});
      spectrum_.emplace_back(es.eigenvalues()(i), 0.0);
    }
  } else {
    Eigen::EigenSolver<Mat> es(m, true);
    if (es.info() != Eigen::Success) fail(ErrorCode::EigenSolver, "MatrixExponent: eigensolver failed");
    const CVec vals = es.eigenvalues();
    const CMat vecs = es.eigenvectors();
    for (Eigen::Index i = 0; i < n; ++i) spectrum_.push_back(vals(i));
    const double cond = condition_number(vecs);
    if (cond < 1e8) {
      const CMat pinv = vecs.inverse();
      const CMat rebuilt = vecs * vals.asDiagonal() * pinv;
      const double resid = (rebuilt - m.cast<cdouble>()).norm();
      if (resid <= 1e-11 * std::max(1.0, m.norm()) * std::max(1.0, cond)) {
        has_jordan_ = true;
        jordan_.P = vecs;
        jordan_.Pinv = pinv;
        for (Eigen::Index i = 0; i < n; ++i) jordan_.blocks.push_back({vals(i), 1});
      }
    }
  }
  set_bounds();
}

MatrixExponent MatrixExponent::from_jordan(const CMat& p, std::vector<JordanBlock> blocks) {
  const Eigen::Index n = p.rows();
  require(n > 0 && p.cols() == n, ErrorCode::InvalidArgument, "from_jordan: P must be square");
  Eigen::Index total = 0;
  for (const auto& b : blocks) {
    require(b.size >= 1, ErrorCode::InvalidArgument, "from_jordan: block size must be positive");
    total += b.size;
  }
  require(total == n, ErrorCode::InvalidArgument, "from_jordan: block sizes must sum to dim(P)");
  Eigen::PartialPivLU<CMat> lu(p);
  require(std::abs(lu.determinant()) > 0.0, ErrorCode::InvalidArgument, "from_jordan: P is singular");
  CMat j = CMat::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    for (int k = 0; k < b.size; ++k) {
      j(off + k, off + k) = b.eigenvalue;
      if (k + 1 < b.size) j(off + k + 1, off + k) = 1.0;
    }
    off += b.size;
  }
  const CMat pinv = lu.inverse();
  const CMat full = p * j * pinv;
  require(full.imag().norm() <= 1e-10 * std::max(1.0, full.norm()), ErrorCode::InvalidArgument,
          "from_jordan: P J P^-1 is not real");
  MatrixExponent out;
  out.entries_ = full.real();
  out.scalar_ = std::numeric_limits<double>::quiet_NaN();
  out.diagonal_ = exactly_diagonal(out.entries_);
  out.has_jordan_ = true;
  out.jordan_ = {p, pinv, std::move(blocks)};
  for (const auto& b : out.jordan_.blocks)
    for (int k = 0; k < b.size; ++k) out.spectrum_.push_back(b.eigenvalue);
  out.set_bounds();
  return out;
}

MatrixExponent MatrixExponent::scalar(double a, int dim) {
  return MatrixExponent(Mat(a * Mat::Identity(dim, dim)));
}

MatrixExponent MatrixExponent::diagonal(const Vec& diag) { return MatrixExponent(Mat(diag.asDiagonal())); }

const JordanData& MatrixExponent::jordan() const {
  if (!has_jordan_) {
    fail(ErrorCode::Unsupported,
         "MatrixExponent: no Jordan data (matrix is not numerically diagonalizable; "
         "supply the decomposition explicitly)");
  }
  return jordan_;
}

MatrixExponent MatrixExponent::transpose() const {
  if (!has_jordan_ || diagonal_) return MatrixExponent(Mat(entries_.transpose()));
  // M^T = (Pinv^T S) J (S P^T) with S reversing the order inside each block.
  const Eigen::Index n = entries_.rows();
  CMat s = CMat::Zero(n, n);
  Eigen::Index off = 0;
  for (const auto& b : jordan_.blocks) {
    for (int k = 0; k < b.size; ++k) s(off + k, off + b.size - 1 - k) = 1.0;
    off += b.size;
  }
  MatrixExponent out = *this;
  out.entries_ = entries_.transpose();
  out.jordan_.P = jordan_.Pinv.transpose() * s;
  out.jordan_.Pinv = s * jordan_.P.transpose();
  return out;
}

void MatrixExponent::set_bounds() {
  varpi_ = std::numeric_limits<double>::infinity();
  upsilon_ = -std::numeric_limits<double>::infinity();
  for (const auto& z : spectrum_) {
    varpi_ = std::min(varpi_, z.real());
    upsilon_ = std::max(upsilon_, z.real());
  }
}

Mat expm(const Mat& a) {
  check_square(a, "expm");
  return expm_impl(a);
}

CMat expm(const CMat& a) {
  require(a.rows() > 0 && a.rows() == a.cols() && a.allFinite(), ErrorCode::InvalidArgument,
          "expm: matrix must be square, non-empty and finite");
  return expm_impl(a);
}

Mat matrix_power(const MatrixExponent& m, double c) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "matrix_power: base must be positive");
  const int n = m.dim();
  const double lc = std::log(c);
  if (m.is_diagonal()) {
    Mat out = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) out(i, i) = std::exp(lc * m.entries()(i, i));
    return out;
  }
  if (!m.has_jordan()) return expm(Mat(lc * m.entries()));
  const auto& jd = m.jordan();
  CMat pj(n, n);
  // Columns of P c^J, block by block: c^J is lower-triangular Toeplitz with
  // entries c^theta (log c)^k / k!.
  pj.setZero();
  int off = 0;
  for (const auto& b : jd.blocks) {
    const cdouble base = std::exp(lc * b.eigenvalue);
    std::vector<cdouble> coef(b.size);
    double lk = 1.0;
    for (int k = 0; k < b.size; ++k) {
      coef[k] = base * lk;
      lk *= lc / (k + 1.0);
    }
    for (int col = 0; col < b.size; ++col)
      for (int row = col; row < b.size; ++row)
        pj.col(off + col) += jd.P.col(off + row) * coef[row - col];
    off += b.size;
  }
  return (pj * jd.Pinv).real();
}

Mat matrix_power(const Mat& m, double c) {
  check_square(m, "matrix_power");
  require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "matrix_power: base must be positive");
  return expm(Mat(std::log(c) * m));
}

SpectralBounds spectral_bounds(const Mat& m) {
  check_square(m, "spectral_bounds");
  Eigen::EigenSolver<Mat> es(m, false);
  if (es.info() != Eigen::Success) fail(ErrorCode::EigenSolver, "spectral_bounds: eigensolver failed");
  const CVec vals = es.eigenvalues();
  SpectralBounds b{vals.real().minCoeff(), vals.real().maxCoeff()};
  return b;
}

StemFunction StemFunction::power(double c) {
  require(c > 0.0, ErrorCode::InvalidArgument, "power stem: base must be positive");
  const double lc = std::log(c);
  return custom([lc](cdouble z) { return std::exp(lc * z); },
                [lc](cdouble z, int k) { return std::pow(lc, k) * std::exp(lc * z); });
}

StemFunction StemFunction::bessel_k_order(double u) {
  require(u > 0.0, ErrorCode::InvalidArgument, "bessel stem: argument must be positive");
  return custom([u](cdouble z) {
    if (z.imag() == 0.0) return cdouble(specfun::bessel_k(z.real(), u));
    return specfun::bessel_k(z, u);
  });
}

StemFunction StemFunction::gamma() {
  return custom(
      [](cdouble z) {
        if (z.imag() == 0.0) return cdouble(specfun::gamma(z.real()));
        return specfun::gamma(z);
      },
      {}, true,
      [](cdouble z) {
        // Keep the contour clear of the poles at the non-positive integers.
        double dist = std::numeric_limits<double>::infinity();
        if (z.real() < 0.5) {
          const double nearest = std::min(0.0, std::round(z.real()));
          dist = std::abs(z - cdouble(nearest, 0.0));
        } else {
          dist = std::abs(z);
        }
        return std::min(0.25, 0.5 * dist);
      });
}

StemFunction StemFunction::cosh(double t) {
  return custom([t](cdouble z) { return std::cosh(z * t); },
                [t](cdouble z, int k) {
                  const cdouble base = (k % 2 == 0) ? std::cosh(z * t) : std::sinh(z * t);
                  return std::pow(t, k) * base;
                });
}

StemFunction StemFunction::custom(Fn value, Derivative derivative, bool analytic, Radius radius) {
  StemFunction s;
  s.value_ = std::move(value);
  s.derivative_ = std::move(derivative);
  s.analytic_ = analytic;
  s.radius_ = std::move(radius);
  return s;
}

cdouble StemFunction::derivative(cdouble z, int k) const {
  if (k == 0) return value_(z);
  require(analytic_, ErrorCode::Domain, "stem function is not analytic; derivatives unavailable");
  if (derivative_) return derivative_(z, k);
  const double r = radius_ ? radius_(z) : 0.25;
  return cauchy_derivative(value_, z, k, r);
}

CMat primary_matrix_fn(const StemFunction& h, const MatrixExponent& m) {
  const auto& jd = m.jordan();
  const int n = m.dim();
  CMat hj = CMat::Zero(n, n);
  int off = 0;
  for (const auto& b : jd.blocks) {
    if (b.size > 1 && !h.analytic()) {
      fail(ErrorCode::Domain, "primary_matrix_fn: non-analytic stem on a repeated eigenvalue");
    }
    std::vector<cdouble> coef(b.size);
    double fact = 1.0;
    for (int k = 0; k < b.size; ++k) {
      if (k > 0) fact *= k;
      coef[k] = h.derivative(b.eigenvalue, k) / fact;
    }
    for (int col = 0; col < b.size; ++col)
      for (int row = col; row < b.size; ++row) hj(off + row, off + col) = coef[row - col];
    off += b.size;
  }
  return jd.P * hj * jd.Pinv;
}

Mat primary_matrix_fn_real(const StemFunction& h, const MatrixExponent& m) {
  const CMat out = primary_matrix_fn(h, m);
  const double scale = std::max(1e-300, out.norm());
  if (out.imag().norm() > 1e-8 * scale) {
    fail(ErrorCode::Domain, "primary_matrix_fn: result has a non-negligible imaginary part");
  }
  return out.real();
}

Mat matrix_bessel_k_scaled(const Mat& n, double u) {
  check_square(n, "matrix_bessel_k");
  require(u > 0.0 && std::isfinite(u), ErrorCode::Domain, "matrix_bessel_k: argument must be positive");
  const Eigen::Index dim = n.rows();
  Eigen::JacobiSVD<Mat> svd(n);
  const double s = svd.singularValues()(0);
  // Head [0, T] by adaptive quadrature; the tail beyond T is bounded by
  // int_T^inf e^{-u(cosh t - 1) + s t} dt <= e^{-u(cosh T - 1) + s T} / (u sinh T - s).
  auto log_env = [&](double t) { return -u * (std::cosh(t) - 1.0) + s * t; };
  const double t_peak = std::asinh(s / u);
  const double peak = std::max(0.0, log_env(t_peak));
  double t_end = t_peak + 0.5;
  for (;;) {
    const double slope = u * std::sinh(t_end) - s;
    if (slope > 0.0 && log_env(t_end) - std::log(slope) < peak - 38.0) break;
    t_end += 0.25;
  }
  auto integrand = [&](double t) -> Mat {
    const Mat nt = n * t;
    return 0.5 * std::exp(-u * (std::cosh(t) - 1.0)) * (expm(nt) + expm(Mat(-nt)));
  };
  // Panels split at the envelope peak keep the adaptive rule on smooth pieces.
  Mat total = Mat::Zero(dim, dim);
  std::vector<double> cuts = {0.0};
  if (t_peak > 0.05 && t_peak < t_end) cuts.push_back(t_peak);
  for (double c = std::max(cuts.back(), 0.0) + 2.0; c < t_end; c += 2.0) cuts.push_back(c);
  cuts.push_back(t_end);
  double scale = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    scale += quad::gauss_legendre_panel<Mat>(integrand, cuts[i], cuts[i + 1], 16).norm();
  }
  quad::Tolerance tol{1e-15 * scale, 1e-13};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto r = quad::gauss_kronrod<Mat>(integrand, cuts[i], cuts[i + 1], tol, 2000);
    if (!r.converged && r.error > 1e-12 * scale) {
      fail(ErrorCode::NotConverged, "matrix_bessel_k: quadrature did not converge");
    }
    total += r.value;
  }
  return total;
}

Mat matrix_bessel_k(const Mat& n, double u) {
  require(u > 0.0 && std::isfinite(u), ErrorCode::Domain, "matrix_bessel_k: argument must be positive");
  if (u > 700.0) return Mat::Zero(n.rows(), n.cols());
  return matrix_bessel_k_scaled(n, u) * std::exp(-u);
}

}  // namespace trf::matfun
