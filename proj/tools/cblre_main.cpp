#include <CLI11.hpp>
#include <cstdio>
#include <fstream>

#include "cblre/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"CBI-processes with competition in a Levy random environment: "
               "simulation and verification experiments"};
  std::string config_path;
  std::string out_dir = "out";
  long long seed_override = -1;
  int threads = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads,
                 "worker threads (default: CBLRE_THREADS or hardware)");
  app.add_flag("--verbose", verbose, "echo the effective config");
  CLI11_PARSE(app, argc, argv);

  try {
    cblre::Config cfg = cblre::Config::parse_file(config_path);
    if (seed_override >= 0) {
      cfg.set("seed", std::to_string(seed_override));
    }
    if (verbose) {
      std::fputs(cfg.canonical_text().c_str(), stderr);
    }
    cblre::run_experiment(cfg, out_dir, threads);
  } catch (const cblre::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    std::ofstream diag(out_dir + "/diagnostics.txt", std::ios::binary);
    if (diag) diag << e.what() << "\n";
    return 3;
  }
  return 0;
}
