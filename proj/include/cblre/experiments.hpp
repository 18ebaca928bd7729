#pragma once

#include <stdexcept>
#include <string>

#include "cblre/config.hpp"

namespace cblre {

inline constexpr const char* kToolVersion = "cblre 0.1.0";

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs the experiment named by cfg["experiment"], writing result CSVs,
// summary.txt and manifest.txt under out_dir. Outputs depend only on the
// config and seed, never on the thread count. Throws ConfigError for
// invalid configs and NumericalError (or std::runtime_error) for numerical
// failures; the CLI maps those to exit codes 2 and 3.
void run_experiment(const Config& cfg, const std::string& out_dir,
                    int threads = 0);

}  // namespace cblre
