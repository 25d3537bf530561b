// trf: run check / cov / simulate / estimate / xcheck from a JSON config.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "trf/trf.h"

int main(int argc, char** argv) {
  CLI::App app{"Tempered random fields: covariances, simulation and estimators"};
  app.set_version_flag("--version", std::string("trf ") + trf_version());

  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  double tolerance_scale = 0.0;
  bool quiet = false;

  app.add_option("command", command, "check, cov, simulate, estimate or xcheck (overrides the config)")
      ->check(CLI::IsMember({"check", "cov", "simulate", "estimate", "xcheck"}));
  app.add_option("--config", config_path, "JSON run config")->required();
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_option("--tolerance-scale", tolerance_scale, "multiplies every tolerance")->check(CLI::PositiveNumber);
  app.add_flag("-q,--quiet", quiet, "print only errors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "trf: cannot read " << config_path << "\n";
    return 5;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  trf_set_threads(threads);
  trf_run_options opts{};
  opts.config_path = config_path.c_str();
  opts.out_dir = out_dir.empty() ? nullptr : out_dir.c_str();
  opts.has_seed = seed_opt->count() > 0;
  opts.seed = seed;
  opts.tolerance_scale = tolerance_scale;
  opts.command = command.empty() ? nullptr : command.c_str();

  int exit_code = 0;
  char* summary = nullptr;
  const trf_status st = trf_run(text.c_str(), &opts, &exit_code, &summary);
  if (st != TRF_OK) {
    std::cerr << "trf: " << trf_status_name(st) << ": " << trf_last_error() << "\n";
    return 1;
  }
  if (exit_code != 0) std::cerr << "trf: " << trf_last_error() << "\n";
  if (!quiet && summary) std::cout << summary << "\n";
  trf_string_free(summary);
  return exit_code;
}
