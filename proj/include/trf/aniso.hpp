// Operator-anisotropic geometry: the E-adapted norm, generalized polar
// coordinates x = tau^E l, and E-homogeneous functions phi with
// phi(c^E x) = c phi(x).
#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "trf/common.hpp"
#include "trf/matfun.hpp"

namespace trf::aniso {

using matfun::MatrixExponent;

// ||x||_0 = int_0^1 ||t^E x|| dt / t with the Euclidean base norm; needs varpi_E > 0.
double norm0(const Vec& x, const MatrixExponent& e);

struct Polar {
  double tau = 0.0;  // radial part
  Vec l;             // point on the unit sphere {||l||_0 = 1}
};
// Solves x = tau^E l with ||l||_0 = 1; tau = 0 and l = 0 at the origin.
Polar polar_decompose(const Vec& x, const MatrixExponent& e);

enum class PhiVariant {
  Euclidean,     // ||x||, requires E = I
  Radial,        // tau_E(x)
  DiagPower,     // (sum |x_i|^{rho/a_i})^{1/rho}, E = diag(a), rho >= max a_i
  PositivePart,  // max(x, 0) in d = 1; the one-sided kernel of tempered fractional stable motion
};

const char* phi_variant_name(PhiVariant v);
PhiVariant phi_variant_from_name(const std::string& name);

struct Extrema {
  double min = 0.0;
  double max = 0.0;
};

class EHomogeneousFn {
 public:
  EHomogeneousFn() = default;
  EHomogeneousFn(PhiVariant variant, MatrixExponent e, double rho = 0.0);

  double operator()(const Vec& x) const;
  PhiVariant variant() const { return variant_; }
  const MatrixExponent& exponent() const { return e_; }
  double rho() const { return rho_; }
  int dim() const { return e_.dim(); }

  // min and max of phi over the unit sphere of ||.||_0; computed once.
  Extrema extrema() const;

 private:
  struct Cache {
    std::once_flag once;
    Extrema value;
  };
  PhiVariant variant_ = PhiVariant::Radial;
  MatrixExponent e_;
  double rho_ = 0.0;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

// Dense sampling of the sphere plus local refinement; the ratio phi(u)/tau(u)
// is homogeneous of degree zero, so samples are taken on Euclidean directions.
Extrema phi_extrema(const EHomogeneousFn& phi, int samples = 0);

}  // namespace trf::aniso
