// Experiment runner behind the command-line tool: parses a JSON run config,
// dispatches check / cov / simulate / estimate / xcheck, and writes artifacts
// plus a manifest with SHA-256 digests into the output directory.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trf/covariance.hpp"
#include "trf/kernels.hpp"

namespace trf::runner {

using json = nlohmann::json;

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  // unexpected internal error
  kExitSchema = 2,
  kExitExistence = 3,
  kExitTolerance = 4,
  kExitIo = 5,
};

int exit_code_for(ErrorCode code);

// Matrices are row-major nested arrays; a bare number is a 1 x 1 matrix.
Mat matrix_from_json(const json& j, const std::string& pointer);
json matrix_to_json(const Mat& m);

// {"type": "field", "flavor": "MA" | "MA_B" | "H", "lambda", "E", "H",
//  "phi": {"variant", "rho"}, "measure": {"variant": "gaussian" | "sas", "alpha"}, "commuting"}
kernels::FieldSpec field_spec_from_json(const json& j, const std::string& pointer);
json field_spec_to_json(const kernels::FieldSpec& s);

// {"type": "isotropic", "variant": "ITOFBF" | "IBTOFBF", "d", "lambda", "H"}
covariance::IsotropicGaussianSpec isotropic_spec_from_json(const json& j, const std::string& pointer);
json isotropic_spec_to_json(const covariance::IsotropicGaussianSpec& s);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> tolerance_scale;
  std::optional<std::string> command;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  json summary = json::object();
  std::vector<std::string> artifacts;  // paths written, manifest last
};

// Runs one config document. config_path (may be empty) is recorded with its
// digest in the manifest. Never throws; errors map to exit codes.
RunResult run(const std::string& config_text, const Overrides& overrides = {}, const std::string& config_path = {});
RunResult run_file(const std::string& config_path, const Overrides& overrides = {});

std::string build_version();

}  // namespace trf::runner
