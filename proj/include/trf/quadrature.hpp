// Numerical integration: adaptive Gauss-Kronrod, tanh-sinh, exp-sinh,
// Gauss-Legendre panels and Wynn epsilon acceleration of oscillatory tails.
//
// All integrators accept scalar (double, cdouble) or Eigen-valued integrands.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "trf/common.hpp"

namespace trf::quad {

template <class V>
struct Result {
  V value;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(cdouble v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

template <class V>
V zero_like(const V& v) {
  if constexpr (std::is_arithmetic_v<V> || std::is_same_v<V, cdouble>) {
    return V(0);
  } else {
    return V::Zero(v.rows(), v.cols());
  }
}

struct Tolerance {
  double abs = 0.0;
  double rel = 1e-10;
  double target(double scale) const { return std::max(abs, rel * scale); }
};

// 15-point Kronrod rule embedded in a 7-point Gauss rule.
struct GK15 {
  static constexpr std::array<double, 8> x = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class V, class F>
std::pair<V, V> gk15_panel(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  V fc = f(c);
  V kron = fc * GK15::wk[7];
  V gauss = fc * GK15::wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * GK15::x[j];
    V f1 = f(c - dx);
    V f2 = f(c + dx);
    kron += (f1 + f2) * GK15::wk[j];
    if (j % 2 == 1) gauss += (f1 + f2) * GK15::wg[j / 2];
  }
  return {V(kron * h), V(gauss * h)};
}

// Adaptive bisection driven by the largest Kronrod-Gauss discrepancy.
template <class V, class F>
Result<V> gauss_kronrod(F&& f, double a, double b, Tolerance tol = {}, int max_panels = 4000) {
  struct Panel {
    double a, b;
    V value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto eval = [&](double lo, double hi) {
    auto [k, g] = gk15_panel<V>(f, lo, hi);
    return Panel{lo, hi, k, magnitude(V(k - g))};
  };
  std::priority_queue<Panel> heap;
  Panel first = eval(a, b);
  V total = first.value;
  double err = first.err;
  heap.push(first);
  int panels = 1;
  Result<V> out;
  while (err > tol.target(magnitude(total)) && panels < max_panels) {
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      heap.push(p);
      break;
    }
    Panel l = eval(p.a, m);
    Panel r = eval(m, p.b);
    total += l.value + r.value - p.value;
    err += l.err + r.err - p.err;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  // Re-sum to shed accumulated cancellation in the running total.
  V sum = zero_like(total);
  double esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().err;
    heap.pop();
  }
  out.value = sum;
  out.error = esum;
  out.evaluations = 15 * (2 * panels - 1);
  out.converged = esum <= tol.target(magnitude(sum)) * 1.0000001 || esum == 0.0;
  return out;
}

// Tanh-sinh on [a, b]; tolerates integrable endpoint singularities.
// Nodes near a are formed as a + distance so that a = 0 keeps full precision.
template <class V, class F>
Result<V> tanh_sinh(F&& f, double a, double b, Tolerance tol = {}, int max_level = 10) {
  const double half = 0.5 * (b - a);
  const double t_max = 6.1;
  auto contribution = [&](double t, V& acc, bool& any) {
    const double u = 0.5 * kPi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    const double delta = 2.0 * e / (1.0 + e);  // 1 - |tanh u|
    const double ch = std::cosh(u);
    const double w = 0.5 * kPi * std::cosh(t) / (ch * ch) * half;
    const double off = half * delta;
    if (!(off > 0.0) || !(w > 0.0)) return;
    double x = (t < 0.0) ? a + off : b - off;
    if (t == 0.0) x = a + half;
    acc += f(x) * w;
    any = true;
  };
  Result<V> out;
  V sum = f(a + half) * (0.5 * kPi * half);
  int evals = 1;
  for (int j = 1; j <= static_cast<int>(t_max); ++j) {
    bool any = false;
    contribution(double(j), sum, any);
    contribution(-double(j), sum, any);
    evals += 2;
  }
  V estimate = sum;
  double h = 1.0;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    V add = zero_like(sum);
    for (double t = h; t <= t_max; t += 2.0 * h) {
      bool any = false;
      contribution(t, add, any);
      contribution(-t, add, any);
      evals += 2;
    }
    sum += add;
    V next = sum * h;
    const double diff = magnitude(V(next - estimate));
    estimate = next;
    if (level >= 3 && diff <= tol.target(magnitude(next))) {
      out.value = next;
      out.error = diff;
      out.evaluations = evals;
      out.converged = true;
      return out;
    }
    out.error = diff;
  }
  out.value = estimate;
  out.evaluations = evals;
  out.converged = false;
  return out;
}

// Exp-sinh on [a, inf) for integrands with exponential or algebraic decay.
template <class V, class F>
Result<V> exp_sinh(F&& f, double a, Tolerance tol = {}, int max_level = 10) {
  const double t_lo = -6.1;
  const double t_hi = 6.5;
  auto contribution = [&](double t, V& acc) {
    const double u = 0.5 * kPi * std::sinh(t);
    if (u > 690.0) return;
    const double e = std::exp(u);
    const double w = 0.5 * kPi * std::cosh(t) * e;
    if (!(e > 0.0) || !std::isfinite(w)) return;
    V v = f(a + e);
    acc += v * w;
  };
  Result<V> out;
  V sum = zero_like(f(a + 1.0));
  int evals = 1;
  for (double t = t_lo; t <= t_hi; t += 1.0) {
    contribution(t, sum);
    ++evals;
  }
  V estimate = sum;
  double h = 1.0;
  for (int level = 1; level <= max_level; ++level) {
    h *= 0.5;
    V add = zero_like(sum);
    for (double t = t_lo + h; t <= t_hi; t += 2.0 * h) {
      contribution(t, add);
      ++evals;
    }
    sum += add;
    V next = sum * h;
    const double diff = magnitude(V(next - estimate));
    estimate = next;
    if (level >= 3 && diff <= tol.target(magnitude(next))) {
      out.value = next;
      out.error = diff;
      out.evaluations = evals;
      out.converged = true;
      return out;
    }
    out.error = diff;
  }
  out.value = estimate;
  out.evaluations = evals;
  out.converged = false;
  return out;
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x, w;
};
const GaussLegendre& gauss_legendre(int n);

template <class V, class F>
V gauss_legendre_panel(F& f, double a, double b, int n = 32) {
  const auto& rule = gauss_legendre(n);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  V acc = f(c + h * rule.x[0]) * rule.w[0];
  for (int i = 1; i < n; ++i) acc += f(c + h * rule.x[i]) * rule.w[i];
  return V(acc * h);
}

// Wynn epsilon extrapolation of a sequence of partial sums.
// Returns the limit estimate and the distance between the two latest
// diagonal estimates as an error proxy.
struct WynnEstimate {
  double value;
  double error;
};
WynnEstimate wynn_epsilon(const std::vector<double>& partial_sums);

// Integral over [start, inf) of an oscillatory integrand, summed panel by
// panel between the breakpoints produced by breakpoint(k) (k = 1, 2, ...,
// increasing, all > start) and accelerated componentwise with Wynn epsilon.
template <class F, class B>
Result<Vec> oscillatory_tail(F&& f, double start, B&& breakpoint, int components, Tolerance tol,
                             int min_panels = 12, int max_panels = 4000) {
  std::vector<std::vector<double>> partial(components);
  Vec sum = Vec::Zero(components);
  Vec last = Vec::Constant(components, std::nan(""));
  double lo = start;
  int stable = 0;
  Result<Vec> out;
  out.value = sum;
  Tolerance panel_tol{tol.abs * 1e-2, tol.rel * 1e-2};
  for (int k = 1; k <= max_panels; ++k) {
    const double hi = breakpoint(k);
    auto r = gauss_kronrod<Vec>(f, lo, hi, panel_tol, 200);
    out.evaluations += r.evaluations;
    sum += r.value;
    lo = hi;
    for (int c = 0; c < components; ++c) partial[c].push_back(sum[c]);
    if (k < min_panels) continue;
    Vec est(components);
    double err = 0.0;
    for (int c = 0; c < components; ++c) {
      const std::size_t keep = std::min<std::size_t>(partial[c].size(), 40);
      std::vector<double> tail(partial[c].end() - keep, partial[c].end());
      auto w = wynn_epsilon(tail);
      est[c] = w.value;
      err = std::max(err, w.error);
    }
    const double change = (est - last).norm();
    last = est;
    const double target = tol.target(est.norm());
    if (change <= target && err <= 10.0 * target) {
      if (++stable >= 2) {
        out.value = est;
        out.error = std::max(change, err);
        out.converged = true;
        return out;
      }
    } else {
      stable = 0;
    }
  }
  out.value = last;
  out.converged = false;
  return out;
}

}  // namespace trf::quad
