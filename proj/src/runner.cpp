#include "trf/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <memory>
#include <sstream>

#include "trf/estimate.hpp"
#include "trf/io.hpp"
#include "trf/simulate.hpp"

namespace trf::runner {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kMaxDraws = 100000;

[[noreturn]] void schema(const std::string& pointer, const std::string& what) {
  fail(ErrorCode::Schema, pointer + ": " + what);
}

// Re-raises schema errors from nested parsers with their pointer rooted at `prefix`.
template <class F>
auto rooted(const std::string& prefix, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    const std::string what = e.what();
    if (e.code() == ErrorCode::Schema && !what.empty() && what[0] == '/') fail(ErrorCode::Schema, prefix + what);
    throw;
  }
}

const json& member(const json& j, const std::string& key, const std::string& pointer) {
  if (!j.is_object()) schema(pointer, "must be an object");
  auto it = j.find(key);
  if (it == j.end()) schema(pointer + "/" + key, "is required");
  return *it;
}

double number(const json& j, const std::string& pointer) {
  if (!j.is_number()) schema(pointer, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema(pointer, "must be finite");
  return v;
}

int integer(const json& j, const std::string& pointer) {
  if (!j.is_number_integer()) schema(pointer, "must be an integer");
  return j.get<int>();
}

double number_or(const json& doc, const std::string& key, double fallback, const std::string& pointer) {
  return doc.contains(key) ? number(doc.at(key), pointer + "/" + key) : fallback;
}

int integer_or(const json& doc, const std::string& key, int fallback, const std::string& pointer) {
  return doc.contains(key) ? integer(doc.at(key), pointer + "/" + key) : fallback;
}

std::string string_or(const json& doc, const std::string& key, const std::string& fallback, const std::string& pointer) {
  if (!doc.contains(key)) return fallback;
  if (!doc.at(key).is_string()) schema(pointer + "/" + key, "must be a string");
  return doc.at(key).get<std::string>();
}

std::vector<double> number_list(const json& j, const std::string& pointer) {
  if (j.is_number()) return {number(j, pointer)};
  if (!j.is_array()) schema(pointer, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], pointer + "/" + std::to_string(i)));
  return out;
}

Vec point(const json& j, int d, const std::string& pointer) {
  const auto v = number_list(j, pointer);
  if (static_cast<int>(v.size()) != d) schema(pointer, "must have " + std::to_string(d) + " coordinates");
  return Eigen::Map<const Vec>(v.data(), d);
}

std::uint64_t parse_seed(const json& j, const std::string& pointer) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::size_t used = 0;
    try {
      const auto v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  schema(pointer, "must be a non-negative 64-bit integer");
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---- run context ------------------------------------------------------------

struct Context {
  json config;  // effective config after overrides
  std::string command;
  std::string out;
  double tolerance_scale = 1.0;
  std::optional<std::uint64_t> seed;
  std::vector<json> inputs;
  std::vector<json> outputs;
  std::vector<std::string> paths;
  json summary = json::object();
  int exit_code = kExitOk;
  std::string message;

  std::uint64_t require_seed() const {
    if (!seed) schema("/seed", "is required for stochastic commands");
    return *seed;
  }

  void write(const std::string& name, const std::string& bytes) {
    const std::string path = (fs::path(out) / name).string();
    io::atomic_write(path, bytes);
    outputs.push_back({{"path", name}, {"sha256", io::sha256_hex(bytes)}, {"bytes", bytes.size()}});
    paths.push_back(path);
  }

  std::string read_input(const std::string& path) {
    std::string bytes = io::read_file(path);
    inputs.push_back({{"path", path}, {"sha256", io::sha256_hex(bytes)}});
    return bytes;
  }
};

// Specs: a field spec (kernels) or an isotropic Gaussian spec (covariance).
struct AnySpec {
  std::optional<kernels::FieldSpec> field;
  std::optional<covariance::IsotropicGaussianSpec> iso;
};

AnySpec parse_spec(const json& config) {
  const json& s = member(config, "spec", "");
  const std::string type = string_or(s, "type", "", "/spec");
  AnySpec out;
  if (type == "field") {
    out.field = field_spec_from_json(s, "/spec");
  } else if (type == "isotropic") {
    out.iso = isotropic_spec_from_json(s, "/spec");
  } else {
    schema("/spec/type", "must be \"field\" or \"isotropic\"");
  }
  return out;
}

covariance::Method default_method(const covariance::IsotropicGaussianSpec& s) {
  return s.variant == covariance::IsoVariant::IBTOFBF ? covariance::Method::ClosedForm
                                                      : covariance::Method::KernelQuadrature;
}

covariance::Method method_or_default(const json& doc, const covariance::IsotropicGaussianSpec& s) {
  if (!doc.contains("method")) return default_method(s);
  return rooted("", [&] { return covariance::method_from_name(string_or(doc, "method", "", "")); });
}

// Covariance for exact sampling and covariance tables.
std::unique_ptr<covariance::CovarianceFn> make_covariance(const AnySpec& spec, const json& doc) {
  if (spec.iso) return std::make_unique<covariance::CovarianceModel>(*spec.iso, method_or_default(doc, *spec.iso));
  const auto& f = *spec.field;
  if (f.d != 1 || f.flavor == kernels::Flavor::H || f.measure.variant != kernels::MeasureVariant::Gaussian) {
    fail(ErrorCode::Unsupported, "/spec: covariances of field specs need d = 1, a moving-average flavor and a Gaussian measure");
  }
  return std::make_unique<covariance::KernelCovariance>(f);
}

void check_existence(const kernels::FieldSpec& f, Context& ctx) {
  const auto rep = kernels::existence_check(f);
  if (!rep.ok) {
    std::string what = "existence check failed:";
    for (const auto& s : rep.failures) what += " " + s;
    fail(ErrorCode::Existence, what);
  }
}

std::vector<std::pair<Vec, Vec>> parse_pairs(const json& doc, int d) {
  std::vector<std::pair<Vec, Vec>> out;
  const json& p = doc.at("pairs");
  if (!p.is_array() || p.empty()) schema("/pairs", "must be a non-empty array of [x, x2] pairs");
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string ptr = "/pairs/" + std::to_string(i);
    if (!p[i].is_array() || p[i].size() != 2) schema(ptr, "must be a pair [x, x2]");
    out.emplace_back(point(p[i][0], d, ptr + "/0"), point(p[i][1], d, ptr + "/1"));
  }
  return out;
}

// Ten fixed, non-degenerate point pairs spread over [-1, 1]^d.
std::vector<std::pair<Vec, Vec>> default_pairs(int d) {
  std::vector<std::pair<Vec, Vec>> out;
  for (int k = 0; k < 10; ++k) {
    Vec x(d), x2(d);
    for (int a = 0; a < d; ++a) {
      x(a) = 0.15 + 0.085 * ((3 * k + 2 * a) % 10);
      x2(a) = -0.6 + 0.13 * ((7 * k + a + 1) % 10);
    }
    out.emplace_back(x, x2);
  }
  return out;
}

simulate::GridSpec parse_grid(const json& config, const std::string& key) {
  return simulate::grid_from_json(member(config, key, ""), "/" + key);
}

std::string join_point(const Vec& x) {
  std::string s;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? "," : "") + io::format_double(x(i));
  return s;
}

// ---- commands -----------------------------------------------------------------

void cmd_check(Context& ctx) {
  const AnySpec spec = parse_spec(ctx.config);
  json report;
  if (spec.field) {
    const auto rep = kernels::existence_check(*spec.field);
    report = {{"ok", rep.ok}, {"margins", rep.margins}, {"failures", rep.failures},
              {"spec", field_spec_to_json(*spec.field)}};
    if (!rep.ok) {
      ctx.exit_code = kExitExistence;
      ctx.message = "existence check failed";
    }
  } else {
    const auto& s = *spec.iso;
    json margins;
    if (s.variant == covariance::IsoVariant::ITOFBF) {
      margins["h_in_unit_interval"] = std::min(s.h(0), 1.0 - s.h(s.n - 1));
    } else {
      margins["h_above_d_over_4"] = s.h(0) - 0.25 * s.d;
    }
    report = {{"ok", true}, {"margins", margins}, {"failures", json::array()},
              {"spec", isotropic_spec_to_json(s)}};
  }
  ctx.summary = report;
  ctx.write("check.json", report.dump(2) + "\n");
}

void cmd_cov(Context& ctx) {
  const AnySpec spec = parse_spec(ctx.config);
  const auto cov = make_covariance(spec, ctx.config);
  const int d = cov->dim(), n = cov->components();
  std::vector<std::pair<Vec, Vec>> pairs;
  if (ctx.config.contains("pairs")) {
    pairs = parse_pairs(ctx.config, d);
  } else {
    const auto grid = parse_grid(ctx.config, "grid");
    if (grid.d != d) schema("/grid", "dimension differs from /spec/d");
    if (grid.size() > 2048) schema("/grid", "more than 2048 sites for a pairwise covariance table");
    const auto nodes = grid.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i; j < nodes.size(); ++j) pairs.emplace_back(nodes[i], nodes[j]);
  }
  std::vector<Vec> points;
  for (const auto& p : pairs) {
    points.push_back(p.first);
    points.push_back(p.second);
  }
  cov->prepare(points);
  std::vector<Mat> values(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) { values[i] = cov->cov(pairs[i].first, pairs[i].second); });
  std::string csv;
  for (int a = 0; a < d; ++a) csv += "x" + std::to_string(a) + ",";
  for (int a = 0; a < d; ++a) csv += "x2_" + std::to_string(a) + ",";
  csv += "row,col,value\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        csv += join_point(pairs[i].first) + "," + join_point(pairs[i].second) + "," + std::to_string(r) + "," +
               std::to_string(c) + "," + io::format_double(values[i](r, c)) + "\n";
      }
    }
  }
  json side = {{"spec", ctx.config.at("spec")}, {"pairs", pairs.size()}, {"components", n}};
  if (spec.iso) side["method"] = covariance::method_name(method_or_default(ctx.config, *spec.iso));
  else side["method"] = "kernel_quadrature";
  ctx.write("cov.csv", csv);
  ctx.write("cov.json", side.dump(2) + "\n");
  ctx.summary = side;
}

void cmd_simulate(Context& ctx) {
  const std::uint64_t seed = ctx.require_seed();
  const AnySpec spec = parse_spec(ctx.config);
  const auto grid = parse_grid(ctx.config, "grid");
  const int d = spec.field ? spec.field->d : spec.iso->d;
  const int n = spec.field ? spec.field->n : spec.iso->n;
  if (grid.d != d) schema("/grid", "dimension differs from /spec/d");
  if (spec.field) check_existence(*spec.field, ctx);
  const int draws = integer_or(ctx.config, "draws", 1, "");
  if (draws < 1 || draws > kMaxDraws) schema("/draws", "must lie in [1, " + std::to_string(kMaxDraws) + "]");
  const int site_cap = integer_or(ctx.config, "site_cap", static_cast<int>(simulate::kDefaultSiteCap), "");
  if (site_cap < 2) schema("/site_cap", "must be >= 2");
  try {
    grid.validate(static_cast<std::size_t>(site_cap));
  } catch (const Error& e) {
    schema("/grid", e.what());
  }
  std::string method = spec.iso ? "exact" : (spec.field->flavor == kernels::Flavor::H ? "spectral" : "moving_average");
  method = string_or(ctx.config, "simulation", method, "");
  const bool want_csv = ctx.config.value("csv", false);
  const auto nodes = grid.nodes();

  json discretization = json::object();
  std::function<Mat(std::uint32_t)> draw;
  std::shared_ptr<void> keep;
  std::shared_ptr<simulate::SpectralSampler> spectral;
  if (method == "exact") {
    std::shared_ptr<covariance::CovarianceFn> cov = make_covariance(spec, ctx.config);
    auto sampler = std::make_shared<simulate::GaussianSampler>(*cov, nodes, static_cast<std::size_t>(site_cap));
    keep = cov;
    discretization = {{"jitter", sampler->jitter()}};
    if (spec.iso) discretization["covariance_method"] = covariance::method_name(method_or_default(ctx.config, *spec.iso));
    draw = [sampler, seed](std::uint32_t k) { return sampler->draw(seed, k); };
  } else if (method == "spectral") {
    simulate::GridSpec freq;
    if (ctx.config.contains("frequency_grid")) {
      freq = parse_grid(ctx.config, "frequency_grid");
    } else if (spec.iso) {
      const auto choice = simulate::default_frequency_grid(*spec.iso, grid);
      freq = choice.grid;
      discretization["tail_bound"] = choice.tail_bound;
    } else {
      schema("/frequency_grid", "is required for field specs");
    }
    if (freq.d != d) schema("/frequency_grid", "dimension differs from /spec/d");
    const auto amp = spec.iso ? simulate::amplitude_of(*spec.iso) : simulate::amplitude_of(*spec.field);
    spectral = std::make_shared<simulate::SpectralSampler>(amp, n, nodes, freq);
    discretization["frequency_grid"] = simulate::grid_to_json(freq);
    auto sampler = spectral;
    draw = [sampler, seed](std::uint32_t k) { return sampler->draw(seed, k); };
  } else if (method == "moving_average") {
    if (!spec.field || spec.field->flavor == kernels::Flavor::H) {
      schema("/simulation", "moving_average needs a field spec with flavor MA or MA_B");
    }
    simulate::GridSpec cells;
    if (ctx.config.contains("integration_grid")) {
      cells = parse_grid(ctx.config, "integration_grid");
    } else {
      double width = grid.node_step(0);
      for (int a = 1; a < d; ++a) width = std::min(width, grid.node_step(a));
      width = number_or(ctx.config, "cell_width", width, "");
      if (!(width > 0.0)) schema("/cell_width", "must be positive");
      cells = simulate::default_integration_grid(*spec.field, grid, width);
    }
    if (cells.d != d) schema("/integration_grid", "dimension differs from /spec/d");
    const double trunc = simulate::ma_truncation_error(*spec.field, grid, cells);
    discretization = {{"integration_grid", simulate::grid_to_json(cells)}, {"truncation_error", trunc}};
    const double limit = 0.1 * ctx.tolerance_scale;
    if (trunc > limit) {
      fail(ErrorCode::Tolerance, "moving-average truncation error " + io::format_double(trunc) +
                                     " exceeds " + io::format_double(limit) + "; enlarge the integration grid");
    }
    auto sampler = std::make_shared<simulate::MovingAverageSampler>(*spec.field, nodes, cells);
    draw = [sampler, seed](std::uint32_t k) { return sampler->draw(seed, k); };
  } else {
    schema("/simulation", "must be \"exact\", \"spectral\" or \"moving_average\"");
  }

  json files = json::array();
  double worst_imag = 0.0;
  for (int k = 0; k < draws; ++k) {
    simulate::Realization r;
    r.grid = grid;
    r.n = n;
    r.values = draw(static_cast<std::uint32_t>(k));
    if (spectral) worst_imag = std::max(worst_imag, spectral->last_imag_residue());
    r.provenance = {{"seed", seed},
                    {"draw", k},
                    {"simulation", method},
                    {"spec", ctx.config.at("spec")},
                    {"discretization", discretization},
                    {"build", build_version()}};
    char name[48];
    std::snprintf(name, sizeof name, "realization_%05d", k);
    ctx.write(std::string(name) + ".trf", simulate::encode_realization(r));
    if (want_csv) ctx.write(std::string(name) + ".csv", simulate::realization_csv(r));
    files.push_back(std::string(name) + ".trf");
  }
  ctx.summary = {{"simulation", method}, {"draws", draws}, {"sites", grid.size()}, {"files", files},
                 {"discretization", discretization}};
  if (spectral) ctx.summary["imag_residue"] = worst_imag;
}

std::vector<simulate::Realization> load_inputs(Context& ctx) {
  const json& list = member(ctx.config, "inputs", "");
  if (!list.is_array() || list.empty()) schema("/inputs", "must be a non-empty array of realization paths");
  std::vector<simulate::Realization> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_string()) schema("/inputs/" + std::to_string(i), "must be a path");
    out.push_back(simulate::decode_realization(ctx.read_input(list[i].get<std::string>())));
  }
  return out;
}

std::optional<double> optional_number(const json& doc, const std::string& key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return number(doc.at(key), "/" + key);
}

estimate::HolderOptions holder_options(const json& doc) {
  estimate::HolderOptions o;
  if (doc.contains("lags")) {
    const auto l = number_list(doc.at("lags"), "/lags");
    if (l.size() != 2) schema("/lags", "must be [lo, hi]");
    o.lag_lo = static_cast<int>(l[0]);
    o.lag_hi = static_cast<int>(l[1]);
  }
  return o;
}

// Theoretical Hoelder exponent H / a for scalar specs whose E is a multiple of I.
std::optional<double> holder_target(const AnySpec& spec) {
  if (spec.iso) return spec.iso->n == 1 ? std::optional<double>(spec.iso->h(0)) : std::nullopt;
  const auto& f = *spec.field;
  if (f.n != 1 || std::isnan(f.E.scalar_value())) return std::nullopt;
  return f.H.entries()(0, 0) / f.E.scalar_value();
}

void cmd_estimate(Context& ctx) {
  const json& doc = ctx.config;
  const std::string which = string_or(doc, "estimator", "", "");
  const double scale = ctx.tolerance_scale;
  estimate::EstimateReport rep;
  if (which == "holder") {
    const auto paths = load_inputs(ctx);
    std::vector<int> step(paths[0].grid.d, 0);
    step[0] = 1;
    if (doc.contains("step")) {
      const auto s = number_list(doc.at("step"), "/step");
      if (static_cast<int>(s.size()) != paths[0].grid.d) schema("/step", "must have one entry per grid axis");
      for (std::size_t a = 0; a < s.size(); ++a) step[a] = static_cast<int>(s[a]);
    }
    rep = estimate::directional_holder(paths, step, optional_number(doc, "target"),
                                       number_or(doc, "tolerance", 0.1, "") * scale, holder_options(doc));
  } else if (which == "holder_analytic") {
    const AnySpec spec = parse_spec(doc);
    const auto cov = make_covariance(spec, doc);
    Vec dir = Vec::Zero(cov->dim());
    dir(0) = 1.0;
    if (doc.contains("direction")) dir = point(doc.at("direction"), cov->dim(), "/direction");
    auto target = optional_number(doc, "target");
    if (!target) target = holder_target(spec);
    rep = estimate::directional_holder_analytic(*cov, dir, number_or(doc, "spacing", 1.0 / 1023.0, ""), target,
                                                number_or(doc, "tolerance", 0.05, "") * scale, holder_options(doc));
  } else if (which == "box") {
    const auto paths = load_inputs(ctx);
    estimate::BoxOptions o;
    if (doc.contains("levels")) {
      const auto l = number_list(doc.at("levels"), "/levels");
      if (l.size() != 2) schema("/levels", "must be [lo, hi]");
      o.level_lo = static_cast<int>(l[0]);
      o.level_hi = static_cast<int>(l[1]);
    }
    o.min_column = integer_or(doc, "min_column", o.min_column, "");
    rep = estimate::box_dimension(paths, optional_number(doc, "target"),
                                  number_or(doc, "tolerance", 0.1, "") * scale, o);
  } else if (which == "semi_lrd") {
    const AnySpec spec = parse_spec(doc);
    if (!spec.iso) schema("/spec/type", "semi_lrd needs an isotropic spec");
    const covariance::CovarianceModel model(*spec.iso, method_or_default(doc, *spec.iso));
    estimate::SemiLrdOptions o;
    if (doc.contains("small_lags")) o.small_lags = number_list(doc.at("small_lags"), "/small_lags");
    if (doc.contains("large_lags")) o.large_lags = number_list(doc.at("large_lags"), "/large_lags");
    o.min_r2 = number_or(doc, "min_r2", o.min_r2, "");
    rep = estimate::semi_lrd_profile(model, o);
  } else if (which == "scaling_law") {
    const AnySpec spec = parse_spec(doc);
    if (!spec.iso) schema("/spec/type", "scaling_law needs an isotropic spec");
    const double c = number_or(doc, "c", 2.0, "");
    std::vector<Vec> sites;
    if (doc.contains("sites")) {
      const json& s = doc.at("sites");
      if (!s.is_array() || s.empty()) schema("/sites", "must be a non-empty array of points");
      for (std::size_t i = 0; i < s.size(); ++i) sites.push_back(point(s[i], spec.iso->d, "/sites/" + std::to_string(i)));
    } else {
      sites = parse_grid(doc, "grid").nodes();
    }
    const auto method = method_or_default(doc, *spec.iso);
    const int draws = integer_or(doc, "monte_carlo_draws", 0, "");
    if (draws > 0) {
      rep = estimate::scaling_law_monte_carlo(*spec.iso, method, c, sites, draws, ctx.require_seed());
      rep.tolerance *= scale;
      rep.judge();
    } else {
      rep = estimate::scaling_law_analytic(*spec.iso, method, c, sites, number_or(doc, "tolerance", 1e-6, "") * scale);
    }
  } else if (which == "stable_law") {
    const AnySpec spec = parse_spec(doc);
    const auto* f = spec.field ? &*spec.field : nullptr;
    if (!f || f->d != 1 || f->n != 1 || f->flavor != kernels::Flavor::MA ||
        f->phi.variant() != aniso::PhiVariant::PositivePart || f->measure.variant != kernels::MeasureVariant::SaS ||
        f->E.entries()(0, 0) != 1.0) {
      schema("/spec", "stable_law needs a d = n = 1 MA field with E = 1, positive_part phi and an SaS measure");
    }
    check_existence(*f, ctx);
    estimate::StableLawOptions o;
    if (doc.contains("u")) o.u = number_list(doc.at("u"), "/u");
    o.cell_width = number_or(doc, "cell_width", o.cell_width, "");
    o.bands = number_or(doc, "bands", o.bands, "") * scale;
    const double h = f->H.entries()(0, 0), alpha = f->measure.alpha[0];
    const double t = number_or(doc, "t", 1.0, "");
    const int draws = integer_or(doc, "draws", 50000, "");
    if (doc.contains("c")) {
      rep = estimate::scaling_law_stable(h, alpha, f->lambda, number(doc.at("c"), "/c"), t, draws, ctx.require_seed(), o);
    } else {
      rep = estimate::stable_chf_check(h, alpha, f->lambda, t, draws, ctx.require_seed(), o);
    }
  } else {
    schema("/estimator",
           "must be one of holder, holder_analytic, box, semi_lrd, scaling_law, stable_law");
  }
  ctx.summary = rep.to_json();
  ctx.write("report.json", ctx.summary.dump(2) + "\n");
  ctx.write("report.csv", rep.to_csv());
}

void cmd_xcheck(Context& ctx) {
  const AnySpec spec = parse_spec(ctx.config);
  if (!spec.iso) schema("/spec/type", "xcheck needs an isotropic spec");
  const auto& s = *spec.iso;
  std::vector<covariance::Method> methods;
  if (ctx.config.contains("methods")) {
    const json& m = ctx.config.at("methods");
    if (!m.is_array() || m.size() != 2) schema("/methods", "must name two covariance methods");
    for (int i = 0; i < 2; ++i) {
      if (!m[i].is_string()) schema("/methods/" + std::to_string(i), "must be a string");
      methods.push_back(rooted("/methods/" + std::to_string(i),
                               [&] { return covariance::method_from_name(m[i].get<std::string>()); }));
    }
  } else {
    methods = {default_method(s), covariance::Method::SpectralIntegral};
  }
  const auto pairs = ctx.config.contains("pairs") ? parse_pairs(ctx.config, s.d) : default_pairs(s.d);
  const double tol = number_or(ctx.config, "tolerance", 1e-4, "") * ctx.tolerance_scale;
  const covariance::CovarianceModel a(s, methods[0]), b(s, methods[1]);
  std::vector<Vec> points;
  for (const auto& p : pairs) {
    points.push_back(p.first);
    points.push_back(p.second);
  }
  a.prepare(points);
  b.prepare(points);
  double worst = 0.0;
  std::string csv;
  for (int k = 0; k < s.d; ++k) csv += "x" + std::to_string(k) + ",";
  for (int k = 0; k < s.d; ++k) csv += "x2_" + std::to_string(k) + ",";
  csv += "rel_error\n";
  for (const auto& [x, x2] : pairs) {
    const Mat ca = a.cov(x, x2), cb = b.cov(x, x2);
    const double denom = std::max(cb.norm(), ca.norm());
    const double rel = denom > 0.0 ? (ca - cb).norm() / denom : 0.0;
    worst = std::max(worst, rel);
    csv += join_point(x) + "," + join_point(x2) + "," + io::format_double(rel) + "\n";
  }
  const bool pass = worst <= tol;
  ctx.summary = {{"methods", {covariance::method_name(methods[0]), covariance::method_name(methods[1])}},
                 {"pairs", pairs.size()},
                 {"max_rel_error", worst},
                 {"tolerance", tol},
                 {"pass", pass}};
  ctx.write("xcheck.json", ctx.summary.dump(2) + "\n");
  ctx.write("xcheck.csv", csv);
  if (!pass) {
    ctx.exit_code = kExitTolerance;
    ctx.message = "cross-check failed: max relative error " + io::format_double(worst) + " > " + io::format_double(tol);
  }
}

void write_manifest(Context& ctx, const std::string& started, const std::string& config_path,
                    const std::string& config_text) {
  json inputs = json::array();
  if (!config_path.empty()) inputs.push_back({{"path", config_path}, {"sha256", io::sha256_hex(config_text)}});
  for (const auto& i : ctx.inputs) inputs.push_back(i);
  const json manifest = {{"format", "trf-manifest-1"},
                         {"build_version", build_version()},
                         {"command", ctx.command},
                         {"config", ctx.config},
                         {"config_sha256", io::sha256_hex(ctx.config.dump())},
                         {"started", started},
                         {"finished", utc_now()},
                         {"inputs", inputs},
                         {"outputs", ctx.outputs},
                         {"exit_code", ctx.exit_code},
                         {"message", ctx.message}};
  const std::string path = (fs::path(ctx.out) / "manifest.json").string();
  io::atomic_write(path, manifest.dump(2) + "\n");
  ctx.paths.push_back(path);
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Unsupported:
    case ErrorCode::Domain: return kExitSchema;
    case ErrorCode::Existence: return kExitExistence;
    case ErrorCode::Tolerance:
    case ErrorCode::NotConverged:
    case ErrorCode::Singular:
    case ErrorCode::EigenSolver: return kExitTolerance;
    case ErrorCode::Io: return kExitIo;
  }
  return kExitFailure;
}

std::string build_version() { return std::string("trf ") + kVersion; }

Mat matrix_from_json(const json& j, const std::string& pointer) {
  if (j.is_number()) return Mat::Constant(1, 1, number(j, pointer));
  if (!j.is_array() || j.empty()) schema(pointer, "must be a non-empty row-major array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string p = pointer + "/" + std::to_string(r);
    if (!j[r].is_array()) schema(p, "must be an array");
    if (r == 0) cols = j[r].size();
    if (j[r].size() != cols || cols == 0) schema(p, "rows must have equal, nonzero length");
  }
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      m(r, c) = number(j[r][c], pointer + "/" + std::to_string(r) + "/" + std::to_string(c));
  return m;
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

kernels::FieldSpec field_spec_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) schema(pointer, "must be an object");
  const kernels::Flavor flavor =
      rooted(pointer, [&] { return kernels::flavor_from_name(string_or(j, "flavor", "MA", pointer)); });
  const double lambda = number(member(j, "lambda", pointer), pointer + "/lambda");
  const Mat e = matrix_from_json(member(j, "E", pointer), pointer + "/E");
  const Mat h = matrix_from_json(member(j, "H", pointer), pointer + "/H");
  if (e.rows() != e.cols()) schema(pointer + "/E", "must be square");
  if (h.rows() != h.cols()) schema(pointer + "/H", "must be square");
  if (j.contains("d") && integer(j.at("d"), pointer + "/d") != e.rows()) schema(pointer + "/d", "differs from the size of E");
  if (j.contains("n") && integer(j.at("n"), pointer + "/n") != h.rows()) schema(pointer + "/n", "differs from the size of H");
  aniso::PhiVariant phi = aniso::PhiVariant::Radial;
  double rho = 0.0;
  if (j.contains("phi")) {
    const json& p = j.at("phi");
    const std::string pp = pointer + "/phi";
    const std::string name = p.is_string() ? p.get<std::string>() : string_or(p, "variant", "radial", pp);
    phi = rooted(pp, [&] { return aniso::phi_variant_from_name(name); });
    if (p.is_object()) rho = number_or(p, "rho", 0.0, pp);
  }
  kernels::MeasureSpec measure;
  if (j.contains("measure")) {
    const json& m = j.at("measure");
    const std::string mp = pointer + "/measure";
    const std::string variant = m.is_string() ? m.get<std::string>() : string_or(m, "variant", "gaussian", mp);
    if (variant == "sas") {
      measure = kernels::MeasureSpec::sas(number_list(member(m, "alpha", mp), mp + "/alpha"));
    } else if (variant != "gaussian") {
      schema(mp + "/variant", "must be \"gaussian\" or \"sas\"");
    }
  }
  bool commuting = true;
  if (j.contains("commuting")) {
    if (!j.at("commuting").is_boolean()) schema(pointer + "/commuting", "must be a boolean");
    commuting = j.at("commuting").get<bool>();
  }
  return rooted(pointer, [&] { return kernels::make_field_spec(flavor, lambda, e, h, phi, measure, rho, commuting); });
}

json field_spec_to_json(const kernels::FieldSpec& s) {
  json measure = {{"variant", s.measure.variant == kernels::MeasureVariant::Gaussian ? "gaussian" : "sas"}};
  if (s.measure.variant == kernels::MeasureVariant::SaS) measure["alpha"] = s.measure.alpha;
  return {{"type", "field"},
          {"flavor", kernels::flavor_name(s.flavor)},
          {"d", s.d},
          {"n", s.n},
          {"lambda", s.lambda},
          {"E", matrix_to_json(s.E.entries())},
          {"H", matrix_to_json(s.H.entries())},
          {"phi", {{"variant", aniso::phi_variant_name(s.phi.variant())}, {"rho", s.phi.rho()}}},
          {"measure", measure},
          {"commuting", s.commuting}};
}

covariance::IsotropicGaussianSpec isotropic_spec_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) schema(pointer, "must be an object");
  const auto variant =
      rooted(pointer, [&] { return covariance::iso_variant_from_name(string_or(j, "variant", "ITOFBF", pointer)); });
  const int d = integer(member(j, "d", pointer), pointer + "/d");
  if (d < 1 || d > 3) schema(pointer + "/d", "must be 1, 2 or 3");
  const double lambda = number(member(j, "lambda", pointer), pointer + "/lambda");
  if (!(lambda > 0.0)) schema(pointer + "/lambda", "must be positive");
  const Mat h = matrix_from_json(member(j, "H", pointer), pointer + "/H");
  return rooted(pointer, [&] { return covariance::IsotropicGaussianSpec::make(variant, d, lambda, h); });
}

json isotropic_spec_to_json(const covariance::IsotropicGaussianSpec& s) {
  return {{"type", "isotropic"},
          {"variant", covariance::iso_variant_name(s.variant)},
          {"d", s.d},
          {"lambda", s.lambda},
          {"H", matrix_to_json(s.H)}};
}

RunResult run(const std::string& config_text, const Overrides& overrides, const std::string& config_path) {
  Context ctx;
  RunResult result;
  const std::string started = utc_now();
  bool out_known = false;
  try {
    json doc;
    try {
      doc = json::parse(config_text);
    } catch (const json::parse_error& e) {
      schema("", std::string("config is not valid JSON (") + e.what() + ")");
    }
    if (!doc.is_object()) schema("", "config must be a JSON object");
    if (overrides.command) doc["command"] = *overrides.command;
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.out) doc["out"] = *overrides.out;
    if (overrides.tolerance_scale) doc["tolerance_scale"] = *overrides.tolerance_scale;
    ctx.config = doc;
    ctx.command = string_or(doc, "command", "", "");
    if (ctx.command.empty()) schema("/command", "is required");
    ctx.out = string_or(doc, "out", "", "");
    if (ctx.out.empty()) schema("/out", "is required");
    out_known = true;
    if (doc.contains("seed")) ctx.seed = parse_seed(doc.at("seed"), "/seed");
    ctx.tolerance_scale = number_or(doc, "tolerance_scale", 1.0, "");
    if (!(ctx.tolerance_scale > 0.0)) schema("/tolerance_scale", "must be positive");

    if (ctx.command == "check") cmd_check(ctx);
    else if (ctx.command == "cov") cmd_cov(ctx);
    else if (ctx.command == "simulate") cmd_simulate(ctx);
    else if (ctx.command == "estimate") cmd_estimate(ctx);
    else if (ctx.command == "xcheck") cmd_xcheck(ctx);
    else schema("/command", "must be one of check, cov, simulate, estimate, xcheck");
  } catch (const Error& e) {
    ctx.exit_code = exit_code_for(e.code());
    ctx.message = std::string(error_code_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    ctx.exit_code = kExitFailure;
    ctx.message = std::string("internal: ") + e.what();
  }
  if (out_known) {
    try {
      write_manifest(ctx, started, config_path, config_text);
    } catch (const Error& e) {
      if (ctx.exit_code == kExitOk) ctx.exit_code = exit_code_for(e.code());
      if (ctx.message.empty()) ctx.message = e.what();
    }
  }
  result.exit_code = ctx.exit_code;
  result.message = ctx.message;
  result.summary = ctx.summary;
  result.artifacts = ctx.paths;
  return result;
}

RunResult run_file(const std::string& config_path, const Overrides& overrides) {
  std::string text;
  try {
    text = io::read_file(config_path);
  } catch (const Error& e) {
    RunResult r;
    r.exit_code = kExitIo;
    r.message = e.what();
    return r;
  }
  return run(text, overrides, config_path);
}

}  // namespace trf::runner
