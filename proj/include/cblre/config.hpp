#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "cblre/levy.hpp"
#include "cblre/mechanisms.hpp"

namespace cblre {

// A config error names the offending key; the driver maps it to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Flat key=value configuration with dotted sections, '#' comments and
// unknown-key rejection.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double dflt) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long dflt) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t dflt) const;
  std::vector<double> get_double_list(const std::string& key) const;

  // keys read so far are marked consumed; reject_unknown throws on leftovers
  void reject_unknown() const;
  // canonical "key=value\n" text, sorted by key
  std::string canonical_text() const;
  std::uint64_t hash() const;  // FNV-1a of the canonical text

  // keys with the given prefix followed by ".<index>."
  std::vector<int> indexed_group(const std::string& prefix) const;

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;
};

// Model builders shared by the experiments.
JumpLaw parse_jump_law(const std::string& text, const std::string& key);
// small_var_out, when given, receives int_{|z|<eps} z^2 pi(dz) summed over
// the truncated-density components (the optional gaussian path correction).
std::vector<JumpComponent> build_jump_components(const Config& cfg,
                                                 const std::string& prefix,
                                                 double* small_var_out = nullptr);
LevyTriplet build_environment(const Config& cfg, EnvVariant variant,
                              std::optional<double> psi_prime0 = std::nullopt);
BranchingMechanism build_mechanism(const Config& cfg);
std::optional<ImmigrationMechanism> build_immigration(const Config& cfg);

}  // namespace cblre
