#include "trf/aniso.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "trf/quadrature.hpp"

namespace trf::aniso {

namespace {

// v -> ||exp(-v E) x||, specialised for diagonal and Jordan-decomposed E.
class Orbit {
 public:
  Orbit(const Vec& x, const MatrixExponent& e) : x_(x), e_(e) {
    if (!e.is_diagonal() && e.has_jordan()) y_ = e.jordan().Pinv * x.cast<cdouble>();
  }

  double operator()(double v) const {
    const int d = e_.dim();
    if (e_.is_diagonal()) {
      double s = 0.0;
      for (int i = 0; i < d; ++i) {
        const double c = std::exp(-v * e_.entries()(i, i)) * x_(i);
        s += c * c;
      }
      return std::sqrt(s);
    }
    if (e_.has_jordan()) {
      const auto& jd = e_.jordan();
      CVec w = CVec::Zero(d);
      int off = 0;
      for (const auto& b : jd.blocks) {
        const cdouble base = std::exp(-v * b.eigenvalue);
        for (int col = 0; col < b.size; ++col) {
          double coef = 1.0;
          for (int row = col; row < b.size; ++row) {
            w(off + row) += base * coef * y_(off + col);
            coef *= -v / (row - col + 1.0);
          }
        }
        off += b.size;
      }
      return (jd.P * w).real().norm();
    }
    return (matfun::expm(Mat(-v * e_.entries())) * x_).norm();
  }

 private:
  const Vec& x_;
  const MatrixExponent& e_;
  CVec y_;
};

double integrate_panels(const Orbit& g, double a, double b, double width) {
  if (a == b) return 0.0;
  const double sign = b > a ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  const double h = (hi - lo) / panels;
  auto f = [&](double v) { return g(v); };
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) acc += quad::gauss_legendre_panel<double>(f, lo + k * h, lo + (k + 1) * h, 20);
  return sign * acc;
}

struct Rates {
  double base;   // panel width resolving the fastest mode
  double slow;   // decay rate of the slowest mode
};

Rates rates_of(const MatrixExponent& e) {
  require(e.varpi() > 0.0, ErrorCode::InvalidArgument, "anisotropic norm needs varpi_E > 0");
  return {std::min(1.0, 2.0 / e.upsilon()), e.varpi()};
}

// int_start^inf g(v) dv with geometrically growing panels.
double integrate_to_infinity(const Orbit& g, double start, const Rates& r) {
  double acc = 0.0;
  double v = start;
  double width = r.base;
  const double max_width = std::max(r.base, 2.0 / r.slow);
  for (int k = 0; k < 100000; ++k) {
    acc += integrate_panels(g, v, v + width, width);
    v += width;
    const double tail = g(v) * 2.0 / r.slow;
    if (tail <= 1e-17 * acc) return acc;
    width = std::min(max_width, width * 1.5);
  }
  fail(ErrorCode::NotConverged, "norm0: tail integral did not converge");
}

}  // namespace

double norm0(const Vec& x, const MatrixExponent& e) {
  require(x.size() == e.dim(), ErrorCode::InvalidArgument, "norm0: dimension mismatch");
  const Rates r = rates_of(e);
  if (x.isZero(0.0)) return 0.0;
  const double a = e.scalar_value();
  if (!std::isnan(a)) return x.norm() / a;
  Orbit g(x, e);
  return integrate_to_infinity(g, 0.0, r);
}

Polar polar_decompose(const Vec& x, const MatrixExponent& e) {
  require(x.size() == e.dim(), ErrorCode::InvalidArgument, "polar_decompose: dimension mismatch");
  const Rates r = rates_of(e);
  Polar out;
  if (x.isZero(0.0)) {
    out.l = Vec::Zero(x.size());
    return out;
  }
  const double a = e.scalar_value();
  if (!std::isnan(a)) {
    out.tau = std::pow(x.norm() / a, 1.0 / a);
    out.l = x * std::pow(out.tau, -a);
    return out;
  }
  Orbit g(x, e);
  // f(rho) = int_rho^inf g = ||exp(-rho E) x||_0 is decreasing; solve f = 1
  // by Newton steps safeguarded with bisection on [-60, 60].
  const double f0 = integrate_to_infinity(g, 0.0, r);
  double lo = -60.0, hi = 60.0;
  double rho = std::clamp(std::log(f0) * e.dim() / e.entries().trace(), lo, hi);
  bool done = false;
  for (int it = 0; it < 200 && !done; ++it) {
    const double f = f0 - integrate_panels(g, 0.0, rho, r.base);
    const double resid = f - 1.0;
    if (std::abs(resid) <= 1e-15) break;
    if (resid > 0.0) lo = rho;
    else hi = rho;
    double next = rho + resid / g(rho);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - rho) <= 1e-15 * std::max(1.0, std::abs(rho))) done = true;
    rho = next;
    if (hi - lo < 1e-15) done = true;
  }
  require(rho > -60.0 + 1e-9 && rho < 60.0 - 1e-9, ErrorCode::Domain,
          "polar_decompose: radial part outside [e^-60, e^60]");
  out.tau = std::exp(rho);
  out.l = matfun::matrix_power(e, 1.0 / out.tau) * x;
  return out;
}

const char* phi_variant_name(PhiVariant v) {
  switch (v) {
    case PhiVariant::Euclidean: return "euclidean";
    case PhiVariant::Radial: return "radial";
    case PhiVariant::DiagPower: return "diag_power";
    case PhiVariant::PositivePart: return "positive_part";
  }
  return "?";
}

PhiVariant phi_variant_from_name(const std::string& name) {
  if (name == "euclidean") return PhiVariant::Euclidean;
  if (name == "radial") return PhiVariant::Radial;
  if (name == "diag_power") return PhiVariant::DiagPower;
  if (name == "positive_part") return PhiVariant::PositivePart;
  fail(ErrorCode::Schema, "unknown phi variant '" + name + "'");
}

EHomogeneousFn::EHomogeneousFn(PhiVariant variant, MatrixExponent e, double rho)
    : variant_(variant), e_(std::move(e)), rho_(rho) {
  require(e_.varpi() > 0.0, ErrorCode::InvalidArgument, "phi: exponent needs varpi > 0");
  const int d = e_.dim();
  switch (variant_) {
    case PhiVariant::Euclidean:
      require(e_.scalar_value() == 1.0, ErrorCode::InvalidArgument,
              "phi: euclidean variant requires the identity exponent");
      break;
    case PhiVariant::Radial:
      break;
    case PhiVariant::DiagPower: {
      require(e_.is_diagonal(), ErrorCode::InvalidArgument, "phi: diag_power requires a diagonal exponent");
      double amax = 0.0;
      for (int i = 0; i < d; ++i) amax = std::max(amax, e_.entries()(i, i));
      require(rho_ >= amax, ErrorCode::InvalidArgument, "phi: diag_power requires rho >= max a_i");
      break;
    }
    case PhiVariant::PositivePart:
      require(d == 1 && e_.scalar_value() == 1.0, ErrorCode::InvalidArgument,
              "phi: positive_part is defined for d = 1 and E = 1");
      break;
  }
}

double EHomogeneousFn::operator()(const Vec& x) const {
  require(x.size() == e_.dim(), ErrorCode::InvalidArgument, "phi: dimension mismatch");
  switch (variant_) {
    case PhiVariant::Euclidean: return x.norm();
    case PhiVariant::Radial: return polar_decompose(x, e_).tau;
    case PhiVariant::DiagPower: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) != 0.0) s += std::pow(std::abs(x(i)), rho_ / e_.entries()(i, i));
      }
      return std::pow(s, 1.0 / rho_);
    }
    case PhiVariant::PositivePart: return std::max(x(0), 0.0);
  }
  return 0.0;
}

Extrema EHomogeneousFn::extrema() const {
  std::call_once(cache_->once, [this] { cache_->value = phi_extrema(*this); });
  return cache_->value;
}

Extrema phi_extrema(const EHomogeneousFn& phi, int samples) {
  const int d = phi.dim();
  const MatrixExponent& e = phi.exponent();
  auto ratio = [&](const Vec& u) { return phi(u) / polar_decompose(u, e).tau; };
  Extrema out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto take = [&](double v) {
    out.min = std::min(out.min, v);
    out.max = std::max(out.max, v);
  };
  if (d == 1) {
    take(ratio(Vec::Constant(1, 1.0)));
    take(ratio(Vec::Constant(1, -1.0)));
    return out;
  }
  if (d == 2) {
    const int n = samples > 0 ? samples : 720;
    auto at = [&](double t) {
      Vec u(2);
      u << std::cos(t), std::sin(t);
      return ratio(u);
    };
    std::vector<double> vals(n);
    for (int k = 0; k < n; ++k) vals[k] = at(2.0 * kPi * k / n);
    auto refine = [&](int k, double sign) {
      // Golden-section search for the extremum of sign * ratio around sample k.
      double a = 2.0 * kPi * (k - 1) / n, b = 2.0 * kPi * (k + 1) / n;
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double c = b - g * (b - a), dd = a + g * (b - a);
      double fc = sign * at(c), fd = sign * at(dd);
      for (int it = 0; it < 60; ++it) {
        if (fc < fd) {
          b = dd; dd = c; fd = fc; c = b - g * (b - a); fc = sign * at(c);
        } else {
          a = c; c = dd; fc = fd; dd = a + g * (b - a); fd = sign * at(dd);
        }
      }
      return sign * std::min(fc, fd);
    };
    int kmin = 0, kmax = 0;
    for (int k = 0; k < n; ++k) {
      if (vals[k] < vals[kmin]) kmin = k;
      if (vals[k] > vals[kmax]) kmax = k;
    }
    out.min = std::min(vals[kmin], refine(kmin, 1.0));
    out.max = std::max(vals[kmax], refine(kmax, -1.0));
    return out;
  }
  // d >= 3: deterministic quasi-uniform directions, then pattern search.
  const int n = samples > 0 ? samples : 2000;
  std::vector<Vec> dirs;
  dirs.reserve(n);
  if (d == 3) {
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / n;
      const double rr = std::sqrt(1.0 - z * z);
      Vec u(3);
      u << rr * std::cos(golden * k), rr * std::sin(golden * k), z;
      dirs.push_back(u);
    }
  } else {
    std::mt19937_64 gen(12345);
    std::normal_distribution<double> normal;
    for (int k = 0; k < n; ++k) {
      Vec u(d);
      for (int i = 0; i < d; ++i) u(i) = normal(gen);
      dirs.push_back(u.normalized());
    }
  }
  int kmin = 0, kmax = 0;
  std::vector<double> vals(n);
  for (int k = 0; k < n; ++k) {
    vals[k] = ratio(dirs[k]);
    if (vals[k] < vals[kmin]) kmin = k;
    if (vals[k] > vals[kmax]) kmax = k;
  }
  auto search = [&](Vec u, double sign) {
    double best = sign * ratio(u);
    double step = 2.0 / std::sqrt(double(n));
    while (step > 1e-9) {
      bool improved = false;
      for (int i = 0; i < d && !improved; ++i) {
        for (double s : {step, -step}) {
          Vec v = u;
          v(i) += s;
          v.normalize();
          const double f = sign * ratio(v);
          if (f < best) {
            best = f;
            u = v;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return sign * best;
  };
  out.min = std::min(vals[kmin], search(dirs[kmin], 1.0));
  out.max = std::max(vals[kmax], search(dirs[kmax], -1.0));
  return out;
}

}  // namespace trf::aniso
