#include "trf/trf.h"

#include <cstring>
#include <new>
#include <string>
#include <thread>

#include "trf/covariance.hpp"
#include "trf/kernels.hpp"
#include "trf/runner.hpp"
#include "trf/simulate.hpp"
#include "trf/specfun.hpp"

struct trf_isotropic_spec {
  trf::covariance::IsotropicGaussianSpec spec;
};

struct trf_field_spec {
  trf::kernels::FieldSpec spec;
};

struct trf_realization {
  trf::simulate::Realization r;
  std::vector<double> row_major;
};

namespace {

thread_local std::string g_last_error;

trf_status status_of(trf::ErrorCode code) {
  using trf::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::Unsupported: return TRF_INVALID_ARGUMENT;
    case ErrorCode::Schema: return TRF_SCHEMA;
    case ErrorCode::Existence: return TRF_EXISTENCE;
    case ErrorCode::Tolerance: return TRF_TOLERANCE;
    case ErrorCode::Io: return TRF_IO;
    case ErrorCode::Domain:
    case ErrorCode::NotConverged:
    case ErrorCode::EigenSolver: return TRF_NUMERICAL;
    case ErrorCode::Singular: return TRF_SINGULAR;
  }
  return TRF_INTERNAL;
}

trf_status set_error(trf_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

template <class F>
trf_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return TRF_OK;
  } catch (const trf::Error& e) {
    return set_error(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(TRF_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(TRF_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

trf::covariance::Method method_of(trf_cov_method m) {
  switch (m) {
    case TRF_CLOSED_FORM: return trf::covariance::Method::ClosedForm;
    case TRF_SPECTRAL_INTEGRAL: return trf::covariance::Method::SpectralIntegral;
    case TRF_KERNEL_QUADRATURE: return trf::covariance::Method::KernelQuadrature;
  }
  trf::fail(trf::ErrorCode::InvalidArgument, "unknown covariance method");
}

void need(const void* p, const char* name) {
  if (!p) trf::fail(trf::ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

trf_realization* wrap(trf::simulate::Realization r) {
  auto* out = new trf_realization{std::move(r), {}};
  const auto& v = out->r.values;
  out->row_major.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index a = 0; a < v.cols(); ++a) out->row_major[i * v.cols() + a] = v(i, a);
  return out;
}

}  // namespace

extern "C" {

const char* trf_version(void) { return "0.1.0"; }

const char* trf_last_error(void) { return g_last_error.c_str(); }

const char* trf_status_name(trf_status status) {
  switch (status) {
    case TRF_OK: return "ok";
    case TRF_INVALID_ARGUMENT: return "invalid_argument";
    case TRF_SCHEMA: return "schema";
    case TRF_EXISTENCE: return "existence";
    case TRF_TOLERANCE: return "tolerance";
    case TRF_IO: return "io";
    case TRF_NUMERICAL: return "numerical";
    case TRF_SINGULAR: return "singular";
    case TRF_INTERNAL: return "internal";
  }
  return "unknown";
}

void trf_string_free(char* s) { std::free(s); }

void trf_set_threads(int threads) {
  trf::set_thread_count(threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
}

trf_status trf_bessel_k(double nu, double u, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = trf::specfun::bessel_k(nu, u);
  });
}

trf_status trf_hyp2f1(double a, double b, double c, double z, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = trf::specfun::hyp2f1(a, b, c, z);
  });
}

trf_status trf_sas_sample(double alpha, double scale, uint64_t seed, size_t count, double* out) {
  return guarded([&] {
    need(out, "out");
    const auto v = trf::simulate::sas_sample(alpha, scale, seed, count);
    std::copy(v.begin(), v.end(), out);
  });
}

trf_status trf_isotropic_spec_create(trf_iso_variant variant, int d, int n, double lambda, const double* h,
                                     trf_isotropic_spec** out) {
  return guarded([&] {
    need(h, "h");
    need(out, "out");
    *out = nullptr;
    if (n < 1) trf::fail(trf::ErrorCode::InvalidArgument, "n must be >= 1");
    const trf::Mat hm = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(h, n, n);
    const auto v = variant == TRF_IBTOFBF ? trf::covariance::IsoVariant::IBTOFBF : trf::covariance::IsoVariant::ITOFBF;
    auto spec = trf::covariance::IsotropicGaussianSpec::make(v, d, lambda, hm);
    *out = new trf_isotropic_spec{std::move(spec)};
  });
}

trf_status trf_isotropic_spec_from_json(const char* json, trf_isotropic_spec** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      trf::fail(trf::ErrorCode::Schema, std::string("invalid JSON: ") + e.what());
    }
    *out = new trf_isotropic_spec{trf::runner::isotropic_spec_from_json(j, "")};
  });
}

void trf_isotropic_spec_destroy(trf_isotropic_spec* spec) { delete spec; }

int trf_isotropic_spec_dim(const trf_isotropic_spec* spec) { return spec ? spec->spec.d : 0; }

int trf_isotropic_spec_components(const trf_isotropic_spec* spec) { return spec ? spec->spec.n : 0; }

trf_status trf_isotropic_cov(const trf_isotropic_spec* spec, trf_cov_method method, const double* x,
                             const double* x2, double* out) {
  return guarded([&] {
    need(spec, "spec");
    need(x, "x");
    need(x2, "x2");
    need(out, "out");
    const auto& s = spec->spec;
    const trf::covariance::CovarianceModel model(s, method_of(method));
    const trf::Mat c = model.cov(Eigen::Map<const trf::Vec>(x, s.d), Eigen::Map<const trf::Vec>(x2, s.d));
    for (int r = 0; r < s.n; ++r)
      for (int k = 0; k < s.n; ++k) out[r * s.n + k] = c(r, k);
  });
}

trf_status trf_field_spec_from_json(const char* json, trf_field_spec** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = nullptr;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      trf::fail(trf::ErrorCode::Schema, std::string("invalid JSON: ") + e.what());
    }
    *out = new trf_field_spec{trf::runner::field_spec_from_json(j, "")};
  });
}

void trf_field_spec_destroy(trf_field_spec* spec) { delete spec; }

trf_status trf_field_existence(const trf_field_spec* spec, int* ok, char** report_json) {
  return guarded([&] {
    need(spec, "spec");
    const auto rep = trf::kernels::existence_check(spec->spec);
    if (ok) *ok = rep.ok ? 1 : 0;
    if (report_json) {
      const nlohmann::json j = {{"ok", rep.ok}, {"margins", rep.margins}, {"failures", rep.failures}};
      *report_json = copy_string(j.dump());
    }
  });
}

trf_status trf_field_kernel(const trf_field_spec* spec, const double* x, const double* y, double* out) {
  return guarded([&] {
    need(spec, "spec");
    need(x, "x");
    need(y, "y");
    need(out, "out");
    const auto& s = spec->spec;
    if (s.flavor == trf::kernels::Flavor::H) {
      trf::fail(trf::ErrorCode::InvalidArgument, "the H flavor has no moving-average kernel");
    }
    const trf::kernels::KernelEvaluator ev(s);
    const trf::Mat k = ev.time_kernel(Eigen::Map<const trf::Vec>(x, s.d), Eigen::Map<const trf::Vec>(y, s.d));
    for (int r = 0; r < s.n; ++r)
      for (int c = 0; c < s.n; ++c) out[r * s.n + c] = k(r, c);
  });
}

trf_status trf_simulate_exact(const trf_isotropic_spec* spec, trf_cov_method method, const double* lo,
                              const double* hi, const int* count, uint64_t seed, trf_realization** out) {
  return guarded([&] {
    need(spec, "spec");
    need(lo, "lo");
    need(hi, "hi");
    need(count, "count");
    need(out, "out");
    *out = nullptr;
    const int d = spec->spec.d;
    const auto grid = trf::simulate::GridSpec::regular(std::vector<double>(lo, lo + d), std::vector<double>(hi, hi + d),
                                                       std::vector<int>(count, count + d));
    const trf::covariance::CovarianceModel model(spec->spec, method_of(method));
    *out = wrap(trf::simulate::gaussian_exact(model, grid, seed));
  });
}

trf_status trf_realization_load(const char* path, trf_realization** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = wrap(trf::simulate::load_realization(path));
  });
}

trf_status trf_realization_save(const trf_realization* r, const char* path) {
  return guarded([&] {
    need(r, "realization");
    need(path, "path");
    trf::simulate::save_realization(path, r->r);
  });
}

void trf_realization_destroy(trf_realization* r) { delete r; }

size_t trf_realization_sites(const trf_realization* r) { return r ? r->r.grid.size() : 0; }

int trf_realization_components(const trf_realization* r) { return r ? r->r.n : 0; }

int trf_realization_dim(const trf_realization* r) { return r ? r->r.grid.d : 0; }

const double* trf_realization_values(const trf_realization* r) { return r ? r->row_major.data() : nullptr; }

trf_status trf_run(const char* config_json, const trf_run_options* options, int* exit_code, char** summary_json) {
  return guarded([&] {
    need(config_json, "config_json");
    need(exit_code, "exit_code");
    trf::runner::Overrides o;
    std::string config_path;
    if (options) {
      if (options->config_path) config_path = options->config_path;
      if (options->out_dir) o.out = std::string(options->out_dir);
      if (options->has_seed) o.seed = options->seed;
      if (options->tolerance_scale > 0.0) o.tolerance_scale = options->tolerance_scale;
      if (options->command) o.command = std::string(options->command);
    }
    const auto result = trf::runner::run(config_json, o, config_path);
    *exit_code = result.exit_code;
    if (result.exit_code != 0) g_last_error = result.message;
    if (summary_json) {
      const nlohmann::json j = {{"exit_code", result.exit_code},
                                {"message", result.message},
                                {"summary", result.summary},
                                {"artifacts", result.artifacts}};
      *summary_json = copy_string(j.dump(2));
    }
  });
}

}  // extern "C"
