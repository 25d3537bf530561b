// Field synthesis on regular grids: exact Gaussian sampling from a
// covariance, Riemann-sum spectral synthesis of harmonizable fields, and
// Riemann-sum moving-average synthesis against Gaussian or symmetric
// alpha-stable noise.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trf/common.hpp"
#include "trf/covariance.hpp"
#include "trf/kernels.hpp"
#include "trf/rng.hpp"

namespace trf::simulate {

using json = nlohmann::json;

constexpr std::size_t kDefaultSiteCap = 16384;

// Regular grid. Sample sites are the nodes lo + i (hi - lo) / (count - 1);
// integration and frequency grids use the cell centres instead.
struct GridSpec {
  int d = 1;
  std::vector<double> lo, hi;
  std::vector<int> count;

  static GridSpec regular(std::vector<double> lo, std::vector<double> hi, std::vector<int> count);
  void validate(std::size_t cap = kDefaultSiteCap) const;
  std::size_t size() const;
  std::vector<int> index(std::size_t linear) const;
  Vec node(std::size_t linear) const;
  std::vector<Vec> nodes() const;
  double node_step(int axis) const { return (hi[axis] - lo[axis]) / (count[axis] - 1); }
  // Centres of count[axis] equal cells; exactly antisymmetric when lo = -hi.
  Vec cell_centre(std::size_t linear) const;
  std::vector<Vec> cell_centres() const;
  double cell_step(int axis) const { return (hi[axis] - lo[axis]) / count[axis]; }
  double cell_volume() const;
  // Linear index of the cell mirrored through the grid centre.
  std::size_t mirror(std::size_t linear) const;
};

json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const json& j, const std::string& pointer);

struct Realization {
  GridSpec grid;
  int n = 1;
  Mat values;  // sites x n, row-major in files
  json provenance;
};

// ---- exact Gaussian sampling ---------------------------------------------

// Factors the Gram matrix of a covariance on a fixed site set once and then
// draws independent samples indexed by (seed, draw).
class GaussianSampler {
 public:
  GaussianSampler(const covariance::CovarianceFn& cov, const std::vector<Vec>& sites,
                  std::size_t cap = kDefaultSiteCap);
  // sites x n.
  Mat draw(std::uint64_t seed, std::uint32_t draw_index) const;
  double jitter() const { return jitter_; }
  std::size_t sites() const { return sites_; }

 private:
  std::size_t sites_ = 0;
  int n_ = 1;
  std::vector<Eigen::Index> active_;  // Gram rows with positive variance
  Mat factor_;                        // lower Cholesky factor on the active rows
  double jitter_ = 0.0;
};

// Gram matrix, site-major: entry (i n + a, j n + b).
Mat gram_matrix(const covariance::CovarianceFn& cov, const std::vector<Vec>& sites);

Realization gaussian_exact(const covariance::CovarianceFn& cov, const GridSpec& grid, std::uint64_t seed,
                           std::size_t cap = kDefaultSiteCap);

// ---- spectral synthesis ----------------------------------------------------

// Amplitude A(xi): X(x) = int (e^{-i<x, xi>} - 1) A(xi) W(d xi).
using Amplitude = std::function<Mat(const Vec&)>;

Amplitude amplitude_of(const kernels::FieldSpec& spec);
Amplitude amplitude_of(const covariance::IsotropicGaussianSpec& spec);

class SpectralSampler {
 public:
  SpectralSampler(Amplitude amplitude, int n, const std::vector<Vec>& sites, const GridSpec& freq);
  Mat draw(std::uint64_t seed, std::uint32_t draw_index) const;
  // Largest |imaginary part| seen in the last draw, relative to the real scale.
  double last_imag_residue() const { return last_imag_; }

 private:
  int n_;
  std::vector<Vec> sites_;
  GridSpec freq_;
  std::vector<Vec> xi_;
  std::vector<Mat> amp_;
  std::vector<std::size_t> reps_;  // one cell per mirror pair
  double scale_;
  mutable double last_imag_ = 0.0;
};

// Covariance of the discretized spectral field: sum_k dxi w_x(xi_k) w_x2(xi_k)^*.
Mat spectral_discrete_cov(const Amplitude& amplitude, int n, const GridSpec& freq, const Vec& x, const Vec& x2);

// Symmetric frequency grid whose period 2 pi / dxi covers twice the site
// extent plus 25 / lambda, out to the xi_max where the amplitude tail bound
// drops below tail_fraction of the variance. At most max_cells per axis; when
// capped the step widens and the alias error grows.
struct FrequencyGridChoice {
  GridSpec grid;
  double xi_max = 0.0;
  double tail_bound = 0.0;  // relative spectral mass beyond xi_max, from the power-law bound
};
FrequencyGridChoice default_frequency_grid(const covariance::IsotropicGaussianSpec& spec, const GridSpec& sites,
                                           double tail_fraction = 1e-4, int max_cells = 1 << 14);

Realization spectral_synthesis(const kernels::FieldSpec& spec, const GridSpec& grid, const GridSpec& freq,
                               std::uint64_t seed);
Realization spectral_synthesis(const covariance::IsotropicGaussianSpec& spec, const GridSpec& grid,
                               const GridSpec& freq, std::uint64_t seed);

// ---- moving-average synthesis ----------------------------------------------

// Symmetric alpha-stable variate with characteristic function exp(-|u|^alpha)
// from the uniform block `index` (Chambers-Mallows-Stuck). At alpha = 2 this
// is sqrt(2) times the standard normal stream.normal(index).
double stable_variate(double alpha, const rng::Stream& stream, std::uint64_t index);

// count SaS variates with characteristic function exp(-|scale u|^alpha).
std::vector<double> sas_sample(double alpha, double scale, std::uint64_t seed, std::size_t count,
                               std::uint32_t draw = 0);

class MovingAverageSampler {
 public:
  MovingAverageSampler(const kernels::FieldSpec& spec, const std::vector<Vec>& sites, const GridSpec& cells);
  Mat draw(std::uint64_t seed, std::uint32_t draw_index) const;
  // sum_k |K(x_i, y_k)|^alpha dy per site and component row (alpha from the measure; 2 if Gaussian).
  Mat lalpha_norms() const;

 private:
  kernels::FieldSpec spec_;
  std::size_t sites_, cells_;
  double dy_;
  std::vector<Mat> kernel_;  // cells_ blocks of (sites_ n) x n
};

// Relative L^alpha mass of the kernel outside the integration grid, estimated
// from a shell that doubles the grid extent; max over sites and components.
double ma_truncation_error(const kernels::FieldSpec& spec, const GridSpec& grid, const GridSpec& cells);

// Integration grid covering phi(x - y) <= R for all sites, with R from the
// tempering bound e^{-eta lambda m_phi R} < 1e-10 (eta = 1/2 for MA, 1/4 for MA_B).
GridSpec default_integration_grid(const kernels::FieldSpec& spec, const GridSpec& grid, double cell_width);

Realization ma_synthesis(const kernels::FieldSpec& spec, const GridSpec& grid, const GridSpec& cells,
                         std::uint64_t seed);

// ---- persistence -----------------------------------------------------------

// "TRF1" | u32 LE header length | UTF-8 JSON header | float64 LE payload (sites x n, row-major).
std::string encode_realization(const Realization& r);
Realization decode_realization(const std::string& bytes);
void save_realization(const std::string& path, const Realization& r);
Realization load_realization(const std::string& path);
std::string realization_csv(const Realization& r);

}  // namespace trf::simulate
