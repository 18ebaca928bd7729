#include "cblre/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cblre {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (...) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    if (cfg.kv_.count(key)) throw ConfigError("duplicate key: " + key);
    cfg.kv_[key] = value;
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

bool Config::has(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it != kv_.end()) consumed_.insert(key);
  return it != kv_.end();
}

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key: " + key);
  consumed_.insert(key);
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  consumed_.insert(key);
  return it->second;
}

double Config::get_double(const std::string& key) const {
  return to_double(get_string(key), key);
}

double Config::get_double(const std::string& key, double dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  consumed_.insert(key);
  return to_double(it->second, key);
}

long long Config::get_int(const std::string& key) const {
  const double d = get_double(key);
  if (d != std::floor(d)) throw ConfigError(key + ": expected an integer");
  return static_cast<long long>(d);
}

long long Config::get_int(const std::string& key, long long dflt) const {
  if (kv_.find(key) == kv_.end()) return dflt;
  return get_int(key);
}

std::uint64_t Config::get_seed(const std::string& key,
                               std::uint64_t dflt) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return dflt;
  consumed_.insert(key);
  try {
    return std::stoull(it->second);
  } catch (...) {
    throw ConfigError(key + ": expected a non-negative integer seed");
  }
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  const std::string s = get_string(key);
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(to_double(tok, key));
  }
  if (out.empty()) throw ConfigError(key + ": expected a comma-separated list");
  return out;
}

void Config::reject_unknown() const {
  for (const auto& [k, v] : kv_) {
    if (!consumed_.count(k)) throw ConfigError("unknown key: " + k);
  }
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical_text()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<int> Config::indexed_group(const std::string& prefix) const {
  std::set<int> idx;
  for (const auto& [k, v] : kv_) {
    if (k.rfind(prefix + ".", 0) != 0) continue;
    const std::string rest = k.substr(prefix.size() + 1);
    const auto dot = rest.find('.');
    if (dot == std::string::npos) continue;
    try {
      idx.insert(std::stoi(rest.substr(0, dot)));
    } catch (...) {
      throw ConfigError("bad index in key: " + k);
    }
  }
  return {idx.begin(), idx.end()};
}

JumpLaw parse_jump_law(const std::string& text, const std::string& key) {
  const auto open = text.find('(');
  const auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw ConfigError(key + ": law must look like name(args), got '" + text + "'");
  }
  const std::string name = text.substr(0, open);
  std::vector<double> args;
  {
    std::istringstream in(text.substr(open + 1, close - open - 1));
    std::string tok;
    while (std::getline(in, tok, ',')) args.push_back(to_double(trim(tok), key));
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ConfigError(key + ": law '" + name + "' takes " + std::to_string(n) +
                        " argument(s)");
    }
  };
  try {
    if (name == "normal") {
      need(2);
      return JumpLaw::normal(args[0], args[1]);
    }
    if (name == "dirac") {
      need(1);
      return JumpLaw::dirac(args[0]);
    }
    if (name == "exp") {
      need(1);
      return JumpLaw::exponential(args[0]);
    }
    if (name == "uniform") {
      need(2);
      return JumpLaw::uniform(args[0], args[1]);
    }
    if (name == "twopoint") {
      need(3);
      return JumpLaw::two_point(args[0], args[1], args[2]);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
  throw ConfigError(key + ": unknown law '" + name + "'");
}

std::vector<JumpComponent> build_jump_components(const Config& cfg,
                                                 const std::string& prefix,
                                                 double* small_var_out) {
  std::vector<JumpComponent> comps;
  if (small_var_out) *small_var_out = 0.0;
  for (int i : cfg.indexed_group(prefix)) {
    const std::string base = prefix + "." + std::to_string(i);
    const std::string kind = cfg.get_string(base + ".kind");
    if (kind == "cp") {
      const double rate = cfg.get_double(base + ".rate");
      if (!(rate > 0)) throw ConfigError(base + ".rate must be > 0");
      JumpLaw law = parse_jump_law(cfg.get_string(base + ".law"), base + ".law");
      comps.push_back({rate, std::move(law), false});
    } else if (kind == "density") {
      // c |z|^{-1-beta} truncated to eps < |z| < 1
      const double beta = cfg.get_double(base + ".beta");
      const double coef = cfg.get_double(base + ".coef", 1.0);
      const double eps = cfg.get_double(base + ".eps");
      const std::string side = cfg.get_string(base + ".side", "pos");
      if (!(eps > 0 && eps < 1)) throw ConfigError(base + ".eps must be in (0,1)");
      if (!(coef > 0)) throw ConfigError(base + ".coef must be > 0");
      auto dens = [beta, coef](double z) {
        return coef * std::pow(std::abs(z), -1.0 - beta);
      };
      if (small_var_out) {
        // int_0^eps z^2 coef z^{-1-beta} dz per side
        const double one_side = coef * std::pow(eps, 2.0 - beta) / (2.0 - beta);
        *small_var_out += (side == "both" ? 2.0 : 1.0) * one_side;
      }
      double mass = 0;
      if (side == "pos") {
        JumpLaw law = JumpLaw::from_density(dens, eps, 1.0, &mass);
        comps.push_back({mass, std::move(law), true});
      } else if (side == "neg") {
        JumpLaw law = JumpLaw::from_density(dens, -1.0, -eps, &mass);
        comps.push_back({mass, std::move(law), true});
      } else if (side == "both") {
        JumpLaw pos = JumpLaw::from_density(dens, eps, 1.0, &mass);
        comps.push_back({mass, std::move(pos), true});
        JumpLaw neg = JumpLaw::from_density(dens, -1.0, -eps, &mass);
        comps.push_back({mass, std::move(neg), true});
      } else {
        throw ConfigError(base + ".side must be pos, neg or both");
      }
    } else {
      throw ConfigError(base + ".kind must be cp or density");
    }
  }
  return comps;
}

LevyTriplet build_environment(const Config& cfg, EnvVariant variant,
                              std::optional<double> psi_prime0) {
  const double alpha = cfg.get_double("env.alpha", 0.0);
  const double sigma = cfg.get_double("env.sigma", 0.0);
  if (!(sigma >= 0)) throw ConfigError("env.sigma must be >= 0");
  double small_var = 0.0;
  auto comps = build_jump_components(cfg, "env.jumps", &small_var);
  if (!psi_prime0 && cfg.has("env.psi_prime0")) {
    psi_prime0 = cfg.get_double("env.psi_prime0");
  }
  try {
    return make_environment(alpha, sigma, std::move(comps), variant, psi_prime0,
                            small_var);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
}

BranchingMechanism build_mechanism(const Config& cfg) {
  const std::string family = cfg.get_string("mech.family");
  try {
    if (family == "feller") {
      return BranchingMechanism::feller(cfg.get_double("mech.a", 0.0),
                                        cfg.get_double("mech.gamma2"),
                                        cfg.get_double("mech.q", 0.0));
    }
    if (family == "stable") {
      return BranchingMechanism::stable(cfg.get_double("mech.alpha"),
                                        cfg.get_double("mech.c"));
    }
    if (family == "finite") {
      JumpLaw law = parse_jump_law(cfg.get_string("mech.law"), "mech.law");
      return BranchingMechanism::finite_activity(
          cfg.get_double("mech.a", 0.0), cfg.get_double("mech.gamma2", 0.0),
          cfg.get_double("mech.rate"), std::move(law),
          cfg.get_double("mech.q", 0.0));
    }
    if (family == "neveu") {
      return BranchingMechanism::neveu();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mech: ") + e.what());
  }
  throw ConfigError("mech.family must be feller, stable, finite or neveu");
}

std::optional<ImmigrationMechanism> build_immigration(const Config& cfg) {
  const bool has_d = cfg.has("imm.d");
  const bool has_rate = cfg.has("imm.rate");
  if (!has_d && !has_rate) return std::nullopt;
  const double d = has_d ? cfg.get_double("imm.d") : 0.0;
  const double rate = has_rate ? cfg.get_double("imm.rate") : 0.0;
  std::optional<JumpLaw> law;
  if (rate > 0) {
    law = parse_jump_law(cfg.get_string("imm.law"), "imm.law");
  }
  try {
    return ImmigrationMechanism(d, rate, std::move(law));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("imm: ") + e.what());
  }
}

}  // namespace cblre
