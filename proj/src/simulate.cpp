#include "trf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/Cholesky>

#include "trf/io.hpp"
#include "trf/rng.hpp"
#include "trf/specfun.hpp"

namespace trf::simulate {

namespace {

[[noreturn]] void schema(const std::string& pointer, const std::string& what) {
  fail(ErrorCode::Schema, pointer + ": " + what);
}

double alpha_of(const kernels::FieldSpec& spec, int component) {
  return spec.measure.variant == kernels::MeasureVariant::Gaussian ? 2.0 : spec.measure.alpha[component];
}

// Unit directions used to bound the set {phi <= R} in Euclidean terms.
std::vector<Vec> probe_directions(int d) {
  std::vector<Vec> out;
  if (d == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  if (d == 2) {
    for (int k = 0; k < 720; ++k) {
      const double t = 2.0 * kPi * k / 720.0;
      Vec u(2);
      u << std::cos(t), std::sin(t);
      out.push_back(u);
    }
    return out;
  }
  // Gaussian directions from a fixed counter stream.
  rng::Stream s(0x5eed, rng::kStreamUser, 0);
  for (int k = 0; k < 2000; ++k) {
    Vec u(d);
    for (int i = 0; i < d; ++i) u(i) = s.normal(static_cast<std::uint64_t>(k) * d + i);
    out.push_back(u.normalized());
  }
  for (int i = 0; i < d; ++i) {
    out.push_back(Vec::Unit(d, i));
    out.push_back(-Vec::Unit(d, i));
  }
  return out;
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& s, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
  return v;
}

void put_f64(std::string& s, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const std::string& s, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[at + i])) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace

// ---- GridSpec ---------------------------------------------------------------

GridSpec GridSpec::regular(std::vector<double> lo, std::vector<double> hi, std::vector<int> count) {
  GridSpec g;
  g.d = static_cast<int>(lo.size());
  g.lo = std::move(lo);
  g.hi = std::move(hi);
  g.count = std::move(count);
  g.validate(std::numeric_limits<std::size_t>::max());
  return g;
}

void GridSpec::validate(std::size_t cap) const {
  if (d < 1) schema("/d", "must be >= 1");
  if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d || static_cast<int>(count.size()) != d) {
    schema("/lo", "lo, hi and count need d entries");
  }
  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(hi[i] > lo[i])) {
      schema("/hi/" + std::to_string(i), "needs finite lo < hi");
    }
    if (count[i] < 2) schema("/count/" + std::to_string(i), "must be >= 2");
  }
  if (size() > cap) schema("/count", "grid has " + std::to_string(size()) + " sites, above the cap " + std::to_string(cap));
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (int c : count) n *= static_cast<std::size_t>(c);
  return n;
}

std::vector<int> GridSpec::index(std::size_t linear) const {
  // Last axis varies fastest.
  std::vector<int> idx(d);
  for (int a = d - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(linear % count[a]);
    linear /= count[a];
  }
  return idx;
}

Vec GridSpec::node(std::size_t linear) const {
  const auto idx = index(linear);
  Vec x(d);
  for (int a = 0; a < d; ++a) {
    x(a) = idx[a] == count[a] - 1 ? hi[a] : lo[a] + idx[a] * node_step(a);
  }
  return x;
}

std::vector<Vec> GridSpec::nodes() const {
  std::vector<Vec> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i);
  return out;
}

Vec GridSpec::cell_centre(std::size_t linear) const {
  const auto idx = index(linear);
  Vec x(d);
  for (int a = 0; a < d; ++a) {
    const double centre = 0.5 * (lo[a] + hi[a]);
    x(a) = centre + (idx[a] + 0.5 - 0.5 * count[a]) * cell_step(a);
  }
  return x;
}

std::vector<Vec> GridSpec::cell_centres() const {
  std::vector<Vec> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cell_centre(i);
  return out;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < d; ++a) v *= cell_step(a);
  return v;
}

std::size_t GridSpec::mirror(std::size_t linear) const {
  auto idx = index(linear);
  std::size_t out = 0;
  for (int a = 0; a < d; ++a) out = out * count[a] + static_cast<std::size_t>(count[a] - 1 - idx[a]);
  return out;
}

json grid_to_json(const GridSpec& g) {
  return json{{"d", g.d}, {"lo", g.lo}, {"hi", g.hi}, {"count", g.count}};
}

GridSpec grid_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) schema(pointer, "grid must be an object");
  GridSpec g;
  try {
    g.lo = j.at("lo").get<std::vector<double>>();
    g.hi = j.at("hi").get<std::vector<double>>();
    g.count = j.at("count").get<std::vector<int>>();
    g.d = j.contains("d") ? j.at("d").get<int>() : static_cast<int>(g.lo.size());
  } catch (const json::exception& e) {
    schema(pointer, std::string("malformed grid (") + e.what() + ")");
  }
  try {
    g.validate(std::numeric_limits<std::size_t>::max());
  } catch (const Error& e) {
    fail(ErrorCode::Schema, pointer + e.what());
  }
  return g;
}

// ---- exact Gaussian ---------------------------------------------------------

Mat gram_matrix(const covariance::CovarianceFn& cov, const std::vector<Vec>& sites) {
  const int n = cov.components();
  const Eigen::Index m = static_cast<Eigen::Index>(sites.size()) * n;
  cov.prepare(sites);
  Mat g(m, m);
  parallel_for(sites.size(), [&](std::size_t i) {
    for (std::size_t j = i; j < sites.size(); ++j) {
      const Mat c = cov.cov(sites[i], sites[j]);
      g.block(i * n, j * n, n, n) = c;
      g.block(j * n, i * n, n, n) = c.transpose();
    }
  });
  return g;
}

GaussianSampler::GaussianSampler(const covariance::CovarianceFn& cov, const std::vector<Vec>& sites,
                                 std::size_t cap)
    : sites_(sites.size()), n_(cov.components()) {
  require(sites_ * n_ <= cap, ErrorCode::InvalidArgument,
          "gaussian_exact: n * sites = " + std::to_string(sites_ * n_) + " exceeds the cap " + std::to_string(cap));
  const Mat g = gram_matrix(cov, sites);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    if (g(i, i) > 0.0) active_.push_back(i);
  const Eigen::Index m = static_cast<Eigen::Index>(active_.size());
  if (m == 0) return;
  Mat a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = g(active_[i], active_[j]);
  const double mean_diag = a.trace() / static_cast<double>(m);
  const double max_jitter = 1e-8 * mean_diag;
  double jitter = 0.0;
  for (;;) {
    Mat b = a;
    b.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(b);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
    if (jitter >= max_jitter) break;
    jitter = jitter == 0.0 ? 1e-14 * mean_diag : std::min(10.0 * jitter, max_jitter);
  }
  fail(ErrorCode::NotConverged, "gaussian_exact: Cholesky factorization failed at the maximal jitter 1e-8 * trace / N");
}

Mat GaussianSampler::draw(std::uint64_t seed, std::uint32_t draw_index) const {
  Mat out = Mat::Zero(static_cast<Eigen::Index>(sites_), n_);
  const Eigen::Index m = static_cast<Eigen::Index>(active_.size());
  if (m == 0) return out;
  rng::Stream s(seed, rng::kStreamExact, draw_index);
  Vec z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = s.normal(static_cast<std::uint64_t>(i));
  const Vec x = factor_.triangularView<Eigen::Lower>() * z;
  for (Eigen::Index i = 0; i < m; ++i) out(active_[i] / n_, active_[i] % n_) = x(i);
  return out;
}

Realization gaussian_exact(const covariance::CovarianceFn& cov, const GridSpec& grid, std::uint64_t seed,
                           std::size_t cap) {
  grid.validate(cap);
  require(grid.d == cov.dim(), ErrorCode::InvalidArgument, "gaussian_exact: grid and covariance dimensions differ");
  GaussianSampler sampler(cov, grid.nodes(), cap);
  Realization r;
  r.grid = grid;
  r.n = cov.components();
  r.values = sampler.draw(seed, 0);
  r.provenance = json{{"seed", seed}, {"method", "gaussian_exact"}, {"jitter", sampler.jitter()}};
  return r;
}

// ---- spectral synthesis -----------------------------------------------------

Amplitude amplitude_of(const kernels::FieldSpec& spec) {
  require(spec.flavor == kernels::Flavor::H, ErrorCode::InvalidArgument, "spectral synthesis needs the H flavor");
  require(spec.measure.variant == kernels::MeasureVariant::Gaussian, ErrorCode::Unsupported,
          "spectral synthesis is implemented for the Gaussian measure only");
  auto ev = std::make_shared<kernels::KernelEvaluator>(spec);
  return [ev](const Vec& xi) { return ev->h_density(xi); };
}

Amplitude amplitude_of(const covariance::IsotropicGaussianSpec& spec) {
  auto s = std::make_shared<covariance::IsotropicGaussianSpec>(spec);
  if (spec.variant == covariance::IsoVariant::ITOFBF) {
    return [s](const Vec& xi) { return covariance::itofbf_spectral_density(*s, xi); };
  }
  return [s](const Vec& xi) { return covariance::ibtofbf_spectral_density(*s, xi); };
}

namespace {

void check_symmetric(const GridSpec& freq) {
  for (int a = 0; a < freq.d; ++a) {
    const double scale = std::max(std::abs(freq.lo[a]), std::abs(freq.hi[a]));
    if (std::abs(freq.lo[a] + freq.hi[a]) > 1e-12 * scale) {
      fail(ErrorCode::InvalidArgument, "spectral synthesis: frequency grid must satisfy lo = -hi on every axis");
    }
  }
}

}  // namespace

SpectralSampler::SpectralSampler(Amplitude amplitude, int n, const std::vector<Vec>& sites, const GridSpec& freq)
    : n_(n), sites_(sites), freq_(freq), scale_(std::sqrt(freq.cell_volume())) {
  check_symmetric(freq);
  const std::size_t cells = freq.size();
  xi_ = freq.cell_centres();
  amp_.resize(cells);
  parallel_for(cells, [&](std::size_t k) { amp_[k] = amplitude(xi_[k]); });
  for (std::size_t k = 0; k < cells; ++k)
    if (k < freq.mirror(k)) reps_.push_back(k);
}

Mat SpectralSampler::draw(std::uint64_t seed, std::uint32_t draw_index) const {
  rng::Stream s(seed, rng::kStreamSpectral, draw_index);
  const std::size_t pairs = reps_.size();
  std::vector<CVec> z(pairs, CVec(n_));
  const double r2 = 1.0 / std::sqrt(2.0);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (int a = 0; a < n_; ++a) {
      const auto [u, v] = s.normal_pair(static_cast<std::uint64_t>(p) * n_ + a);
      z[p](a) = cdouble(u * r2, v * r2);
    }
  }
  Mat out(static_cast<Eigen::Index>(sites_.size()), n_);
  std::vector<double> imag(sites_.size(), 0.0);
  parallel_for(sites_.size(), [&](std::size_t i) {
    const Vec& x = sites_[i];
    CVec acc = CVec::Zero(n_);
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::size_t k = reps_[p];
      const std::size_t km = freq_.mirror(k);
      const cdouble e1 = std::polar(1.0, -x.dot(xi_[k])) - 1.0;
      const cdouble e2 = std::polar(1.0, -x.dot(xi_[km])) - 1.0;
      acc += e1 * (amp_[k].cast<cdouble>() * z[p]);
      acc += e2 * (amp_[km].cast<cdouble>() * z[p].conjugate());
    }
    acc *= scale_;
    out.row(static_cast<Eigen::Index>(i)) = acc.real().transpose();
    imag[i] = acc.imag().cwiseAbs().maxCoeff() / std::max(1.0, acc.real().cwiseAbs().maxCoeff());
  });
  last_imag_ = *std::max_element(imag.begin(), imag.end());
  if (last_imag_ > 1e-10) {
    fail(ErrorCode::Tolerance, "spectral synthesis: imaginary residue " + io::format_double(last_imag_) +
                                   " above 1e-10; the amplitude is not Hermitian symmetric");
  }
  return out;
}

Mat spectral_discrete_cov(const Amplitude& amplitude, int n, const GridSpec& freq, const Vec& x, const Vec& x2) {
  check_symmetric(freq);
  CMat acc = CMat::Zero(n, n);
  const double dv = freq.cell_volume();
  for (std::size_t k = 0; k < freq.size(); ++k) {
    const Vec xi = freq.cell_centre(k);
    const CMat a = amplitude(xi).cast<cdouble>();
    const cdouble e1 = std::polar(1.0, -x.dot(xi)) - 1.0;
    const cdouble e2 = std::polar(1.0, -x2.dot(xi)) - 1.0;
    acc += (e1 * std::conj(e2)) * (a * a.adjoint());
  }
  return (acc * dv).real();
}

FrequencyGridChoice default_frequency_grid(const covariance::IsotropicGaussianSpec& spec, const GridSpec& sites,
                                           double tail_fraction, int max_cells) {
  double extent = 0.0;
  for (int a = 0; a < sites.d; ++a) extent += std::pow(std::max(std::abs(sites.lo[a]), std::abs(sites.hi[a])), 2);
  extent = std::sqrt(extent);
  const int d = spec.d;
  // The cell-centre rule makes the field periodic with period 2 pi / dxi; alias lags sit beyond the
  // sites plus 25 correlation lengths.
  const double period = 2.0 * extent + 25.0 / spec.lambda;
  const double dxi = 2.0 * kPi / period;
  // Squared amplitude decays like rho^{-2p}.
  const double hmin = spec.h.minCoeff();
  const double p = spec.variant == covariance::IsoVariant::ITOFBF ? 0.5 * d + hmin : 2.0 * hmin;
  const double sphere = 2.0 * std::pow(kPi, 0.5 * d) / specfun::gamma(0.5 * d);
  const covariance::CovarianceModel model(
      spec, spec.variant == covariance::IsoVariant::ITOFBF ? covariance::Method::SpectralIntegral
                                                          : covariance::Method::ClosedForm);
  const double variance = model.variance(extent).trace();
  auto tail = [&](double xi_max) {
    Vec probe = Vec::Zero(d);
    probe(0) = xi_max;
    const Mat a = amplitude_of(spec)(probe);
    return 4.0 * sphere * (a * a.transpose()).trace() * std::pow(xi_max, d) / (2.0 * p - d) / variance;
  };
  int per_axis_cap = max_cells;
  if (d > 1) per_axis_cap = std::min(max_cells, static_cast<int>(std::pow(double(1 << 16), 1.0 / d)));
  double xi_max = 4.0 * dxi;
  // Past this cutoff the capped grid would alias inside the site extent.
  const double xi_ceiling = 0.5 * per_axis_cap * kPi / extent;
  while (tail(xi_max) > tail_fraction && 2.0 * xi_max <= xi_ceiling) xi_max *= 2.0;
  int cells = 2 * static_cast<int>(std::ceil(xi_max / dxi));
  if (cells > per_axis_cap) cells = per_axis_cap - per_axis_cap % 2;
  FrequencyGridChoice c;
  c.xi_max = xi_max;
  c.tail_bound = tail(c.xi_max);
  c.grid = GridSpec::regular(std::vector<double>(d, -c.xi_max), std::vector<double>(d, c.xi_max),
                             std::vector<int>(d, cells));
  return c;
}

namespace {

Realization spectral_run(Amplitude amp, int n, const GridSpec& grid, const GridSpec& freq, std::uint64_t seed) {
  grid.validate();
  require(freq.d == grid.d, ErrorCode::InvalidArgument, "spectral synthesis: frequency grid dimension differs");
  SpectralSampler sampler(std::move(amp), n, grid.nodes(), freq);
  Realization r;
  r.grid = grid;
  r.n = n;
  r.values = sampler.draw(seed, 0);
  r.provenance = json{{"seed", seed},
                      {"method", "spectral_synthesis"},
                      {"frequency_grid", grid_to_json(freq)},
                      {"imag_residue", sampler.last_imag_residue()}};
  return r;
}

}  // namespace

Realization spectral_synthesis(const kernels::FieldSpec& spec, const GridSpec& grid, const GridSpec& freq,
                               std::uint64_t seed) {
  require(grid.d == spec.d, ErrorCode::InvalidArgument, "spectral synthesis: grid dimension differs from d");
  return spectral_run(amplitude_of(spec), spec.n, grid, freq, seed);
}

Realization spectral_synthesis(const covariance::IsotropicGaussianSpec& spec, const GridSpec& grid,
                               const GridSpec& freq, std::uint64_t seed) {
  require(grid.d == spec.d, ErrorCode::InvalidArgument, "spectral synthesis: grid dimension differs from d");
  return spectral_run(amplitude_of(spec), spec.n, grid, freq, seed);
}

// ---- stable noise and moving averages --------------------------------------

double stable_variate(double alpha, const rng::Stream& stream, std::uint64_t index) {
  if (alpha == 2.0) return std::sqrt(2.0) * stream.normal(index);
  const auto [u1, u2] = stream.uniform_pair(index);
  const double v = kPi * (u1 - 0.5);
  const double w = -std::log(u2);
  if (alpha == 1.0) return std::tan(v);
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
}

std::vector<double> sas_sample(double alpha, double scale, std::uint64_t seed, std::size_t count,
                               std::uint32_t draw) {
  require(alpha > 0.0 && alpha <= 2.0, ErrorCode::InvalidArgument, "sas_sample: alpha must lie in (0, 2]");
  require(scale > 0.0, ErrorCode::InvalidArgument, "sas_sample: scale must be positive");
  rng::Stream s(seed, rng::kStreamStable, draw);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = scale * stable_variate(alpha, s, i);
  return out;
}

MovingAverageSampler::MovingAverageSampler(const kernels::FieldSpec& spec, const std::vector<Vec>& sites,
                                           const GridSpec& cells)
    : spec_(spec), sites_(sites.size()), cells_(cells.size()), dy_(cells.cell_volume()) {
  require(spec.flavor == kernels::Flavor::MA || spec.flavor == kernels::Flavor::MA_B, ErrorCode::InvalidArgument,
          "ma_synthesis needs the MA or MA_B flavor");
  require(cells.d == spec.d, ErrorCode::InvalidArgument, "ma_synthesis: integration grid dimension differs from d");
  const int n = spec.n;
  const double doubles = static_cast<double>(sites_) * cells_ * n * n;
  require(doubles <= 6.4e7, ErrorCode::InvalidArgument,
          "ma_synthesis: kernel table of " + io::format_double(doubles) + " entries is too large; coarsen the grids");
  const kernels::KernelEvaluator ev(spec);
  kernel_.assign(cells_, Mat());
  parallel_for(cells_, [&](std::size_t k) {
    const Vec y = cells.cell_centre(k);
    Mat block(static_cast<Eigen::Index>(sites_) * n, n);
    for (std::size_t i = 0; i < sites_; ++i) block.block(i * n, 0, n, n) = ev.time_kernel(sites[i], y);
    kernel_[k] = std::move(block);
  });
}

Mat MovingAverageSampler::draw(std::uint64_t seed, std::uint32_t draw_index) const {
  const int n = spec_.n;
  rng::Stream s(seed, rng::kStreamMovingAverage, draw_index);
  std::vector<double> scale(n);
  for (int a = 0; a < n; ++a) scale[a] = std::pow(dy_, 1.0 / alpha_of(spec_, a));
  const bool gaussian = spec_.measure.variant == kernels::MeasureVariant::Gaussian;
  Vec acc = Vec::Zero(static_cast<Eigen::Index>(sites_) * n);
  Vec noise(n);
  for (std::size_t k = 0; k < cells_; ++k) {
    for (int a = 0; a < n; ++a) {
      const std::uint64_t idx = static_cast<std::uint64_t>(k) * n + a;
      noise(a) = scale[a] * (gaussian ? s.normal(idx) : stable_variate(alpha_of(spec_, a), s, idx));
    }
    acc.noalias() += kernel_[k] * noise;
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(acc.data(), static_cast<Eigen::Index>(sites_), n);
}

Mat MovingAverageSampler::lalpha_norms() const {
  const int n = spec_.n;
  Mat out = Mat::Zero(static_cast<Eigen::Index>(sites_), n);
  for (std::size_t k = 0; k < cells_; ++k)
    for (std::size_t i = 0; i < sites_; ++i)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          out(i, a) += std::pow(std::abs(kernel_[k](i * n + a, b)), alpha_of(spec_, b)) * dy_;
  return out;
}

double ma_truncation_error(const kernels::FieldSpec& spec, const GridSpec& grid, const GridSpec& cells) {
  const auto sites = grid.nodes();
  const int n = spec.n;
  const kernels::KernelEvaluator ev(spec);
  GridSpec big = cells;
  std::vector<int> ext(cells.d);
  for (int a = 0; a < cells.d; ++a) {
    ext[a] = std::max(1, cells.count[a] / 2);
    const double h = cells.cell_step(a);
    big.lo[a] -= ext[a] * h;
    big.hi[a] += ext[a] * h;
    big.count[a] += 2 * ext[a];
  }
  const std::size_t m = sites.size() * n;
  std::vector<double> inner(m, 0.0), shell(m, 0.0);
  const double dy = cells.cell_volume();
  for (std::size_t k = 0; k < big.size(); ++k) {
    const auto idx = big.index(k);
    bool inside = true;
    for (int a = 0; a < cells.d; ++a) inside = inside && idx[a] >= ext[a] && idx[a] < ext[a] + cells.count[a];
    const Vec y = big.cell_centre(k);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const Mat kk = ev.time_kernel(sites[i], y);
      for (int a = 0; a < n; ++a) {
        double v = 0.0;
        for (int b = 0; b < n; ++b) v += std::pow(std::abs(kk(a, b)), alpha_of(spec, b)) * dy;
        (inside ? inner : shell)[i * n + a] += v;
      }
    }
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double total = inner[j] + shell[j];
    if (total > 0.0) worst = std::max(worst, shell[j] / total);
  }
  return worst;
}

GridSpec default_integration_grid(const kernels::FieldSpec& spec, const GridSpec& grid, double cell_width) {
  require(cell_width > 0.0, ErrorCode::InvalidArgument, "default_integration_grid: cell width must be positive");
  const double eta = spec.flavor == kernels::Flavor::MA_B ? 0.25 : 0.5;
  const bool one_sided = spec.phi.variant() == aniso::PhiVariant::PositivePart;
  // positive_part vanishes on the half-line y > x, so only its positive side bounds the support.
  const double m_phi = one_sided ? 1.0 : spec.phi.extrema().min;
  const double radius = std::log(1e10) / (eta * spec.lambda * m_phi);
  double reach = 0.0;
  for (const Vec& u : probe_directions(spec.d)) {
    const double p = spec.phi(u);
    if (!(p > 0.0)) continue;
    reach = std::max(reach, (matfun::matrix_power(spec.E, radius / p) * u).norm());
  }
  reach *= 1.05;
  std::vector<double> lo(spec.d), hi(spec.d);
  std::vector<int> count(spec.d);
  for (int a = 0; a < spec.d; ++a) {
    const double lo_site = std::min(grid.lo[a], 0.0), hi_site = std::max(grid.hi[a], 0.0);
    // Cell boundaries fall on lo_site, where the kernels are not smooth.
    lo[a] = lo_site - std::ceil(reach / cell_width) * cell_width;
    const double top = one_sided ? hi_site : hi_site + reach;
    count[a] = std::max(2, static_cast<int>(std::ceil((top - lo[a]) / cell_width - 1e-9)));
    hi[a] = lo[a] + count[a] * cell_width;
  }
  return GridSpec::regular(lo, hi, count);
}

Realization ma_synthesis(const kernels::FieldSpec& spec, const GridSpec& grid, const GridSpec& cells,
                         std::uint64_t seed) {
  grid.validate();
  require(grid.d == spec.d, ErrorCode::InvalidArgument, "ma_synthesis: grid dimension differs from d");
  const auto report = kernels::existence_check(spec);
  if (!report.ok) fail(ErrorCode::Existence, "ma_synthesis: existence check failed");
  MovingAverageSampler sampler(spec, grid.nodes(), cells);
  Realization r;
  r.grid = grid;
  r.n = spec.n;
  r.values = sampler.draw(seed, 0);
  r.provenance = json{{"seed", seed}, {"method", "ma_synthesis"}, {"integration_grid", grid_to_json(cells)}};
  return r;
}

// ---- persistence ------------------------------------------------------------

std::string encode_realization(const Realization& r) {
  require(r.values.rows() == static_cast<Eigen::Index>(r.grid.size()) && r.values.cols() == r.n,
          ErrorCode::InvalidArgument, "encode_realization: values do not match the grid");
  require(r.values.allFinite(), ErrorCode::InvalidArgument, "encode_realization: non-finite values");
  json header{{"format", "TRF1"},
              {"version", 1},
              {"grid", grid_to_json(r.grid)},
              {"n", r.n},
              {"sites", r.grid.size()},
              {"layout", "row-major sites x n, float64 little-endian"},
              {"provenance", r.provenance}};
  const std::string h = header.dump();
  std::string out = "TRF1";
  put_u32(out, static_cast<std::uint32_t>(h.size()));
  out += h;
  for (Eigen::Index i = 0; i < r.values.rows(); ++i)
    for (Eigen::Index a = 0; a < r.values.cols(); ++a) put_f64(out, r.values(i, a));
  return out;
}

Realization decode_realization(const std::string& bytes) {
  if (bytes.size() < 8 || bytes.compare(0, 4, "TRF1") != 0) fail(ErrorCode::Io, "not a TRF1 file");
  const std::uint32_t hlen = get_u32(bytes, 4);
  if (bytes.size() < 8 + static_cast<std::size_t>(hlen)) fail(ErrorCode::Io, "TRF1 header truncated");
  json header;
  try {
    header = json::parse(bytes.substr(8, hlen));
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, std::string("TRF1 header is not valid JSON: ") + e.what());
  }
  Realization r;
  r.grid = grid_from_json(header.at("grid"), "/grid");
  r.n = header.at("n").get<int>();
  r.provenance = header.value("provenance", json::object());
  const std::size_t sites = r.grid.size();
  const std::size_t need = 8 + hlen + sites * r.n * 8;
  if (bytes.size() != need) fail(ErrorCode::Io, "TRF1 payload has the wrong length");
  r.values.resize(static_cast<Eigen::Index>(sites), r.n);
  std::size_t at = 8 + hlen;
  for (std::size_t i = 0; i < sites; ++i)
    for (int a = 0; a < r.n; ++a, at += 8) r.values(i, a) = get_f64(bytes, at);
  return r;
}

void save_realization(const std::string& path, const Realization& r) { io::atomic_write(path, encode_realization(r)); }

Realization load_realization(const std::string& path) { return decode_realization(io::read_file(path)); }

std::string realization_csv(const Realization& r) {
  std::string out;
  for (int a = 0; a < r.grid.d; ++a) out += "x" + std::to_string(a) + ",";
  for (int c = 0; c < r.n; ++c) out += "X" + std::to_string(c) + (c + 1 < r.n ? "," : "\n");
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    const Vec x = r.grid.node(i);
    for (int a = 0; a < r.grid.d; ++a) out += io::format_double(x(a)) + ",";
    for (int c = 0; c < r.n; ++c) out += io::format_double(r.values(i, c)) + (c + 1 < r.n ? "," : "\n");
  }
  return out;
}

}  // namespace trf::simulate
