#include "pks/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pks {

ConfigError::ConfigError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

double to_double(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
    throw ConfigError(key + ": expected a number, got '" + v + "'", e.line);
  return x;
}

int to_int(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  char* end = nullptr;
  errno = 0;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE || x < INT32_MIN || x > INT32_MAX)
    throw ConfigError(key + ": expected an integer, got '" + v + "'", e.line);
  return static_cast<int>(x);
}

bool to_bool(const Entry& e, const std::string& key) {
  const std::string v = trim(e.value);
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected on/off, got '" + v + "'", e.line);
}

std::vector<Entry> split_list(const Entry& e) {
  std::string v = trim(e.value);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated list", e.line);
    v = trim(v.substr(1, v.size() - 2));
  }
  std::vector<Entry> items;
  if (v.empty()) return items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back({trim(item), e.line});
  return items;
}

using Setter = std::function<void(RunConfig&, const Entry&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&t](const std::string& key, double SchemeParams::*field) {
      t[key] = [field](RunConfig& c, const Entry& e, const std::string& k) {
        c.scheme.*field = to_double(e, k);
      };
    };
    real("dt", &SchemeParams::dt);
    real("theta", &SchemeParams::theta);
    real("gamma", &SchemeParams::gamma);
    real("chi", &SchemeParams::chi);
    real("mu", &SchemeParams::mu);
    real("alpha", &SchemeParams::alpha);
    real("newton.tol", &SchemeParams::newton_tol);
    real("safeguard.sigma", &SchemeParams::safeguard_sigma);
    t["T"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.final_time = to_double(e, k);
    };
    t["stabilization"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      const std::string v = trim(e.value);
      if (v == "standard")
        c.scheme.stabilization = Stabilization::Standard;
      else if (v == "damped")
        c.scheme.stabilization = Stabilization::Damped;
      else
        throw ConfigError(k + ": expected standard or damped, got '" + v + "'", e.line);
    };
    t["entropy"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      try {
        c.entropy = EntropyModel::parse(trim(e.value));
      } catch (const std::exception& ex) {
        throw ConfigError(k + ": " + ex.what(), e.line);
      }
    };
    t["newton.max_iters"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.scheme.newton_max_iters = to_int(e, k);
    };
    t["elliptic.tol"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.scheme.elliptic.tol = to_double(e, k);
    };
    t["elliptic.max_iters"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.scheme.elliptic.max_iters = to_int(e, k);
    };
    t["grid.dim"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.dim = to_int(e, k);
      if (c.dim != 2 && c.dim != 3) throw ConfigError(k + ": must be 2 or 3", e.line);
    };
    t["grid.N"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.n = to_int(e, k);
      if (c.n < 4) throw ConfigError(k + ": must be at least 4", e.line);
    };
    t["grid.origin"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.origin = to_double(e, k);
    };
    t["grid.length"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.length = to_double(e, k);
      if (!(c.length > 0)) throw ConfigError(k + ": must be positive", e.line);
    };
    auto ic_kind = [](RunConfig& c, const Entry& e, const std::string& k) {
      const std::string v = trim(e.value);
      if (v == "manufactured")
        c.ic = InitialCondition::Manufactured;
      else if (v == "gaussian")
        c.ic = InitialCondition::Gaussian;
      else
        throw ConfigError(k + ": expected manufactured or gaussian, got '" + v + "'", e.line);
    };
    t["ic"] = ic_kind;
    t["ic.type"] = ic_kind;
    t["ic.amplitude_rho"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.gaussian.amplitude_rho = to_double(e, k);
    };
    t["ic.amplitude_phi"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.gaussian.amplitude_phi = to_double(e, k);
    };
    t["ic.width"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.gaussian.width = to_double(e, k);
    };
    t["ic.center"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      const auto items = split_list(e);
      if (items.size() < 2 || items.size() > 3)
        throw ConfigError(k + ": expected 2 or 3 coordinates", e.line);
      for (std::size_t i = 0; i < items.size(); ++i) c.gaussian.center[i] = to_double(items[i], k);
    };
    t["sources"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sources = to_bool(e, k);
    };
    t["output.dir"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      const std::string v = trim(e.value);
      if (v.empty()) throw ConfigError(k + ": empty path", e.line);
      c.output_dir = v;
    };
    t["output.snapshot_times"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.snapshot_times.clear();
      for (const auto& item : split_list(e)) c.snapshot_times.push_back(to_double(item, k));
    };
    t["output.diagnostics_every"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.diagnostics_every = to_int(e, k);
      if (c.diagnostics_every < 1) throw ConfigError(k + ": must be at least 1", e.line);
    };
    t["sweep.N"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sweep_n.clear();
      for (const auto& item : split_list(e)) {
        const int n = to_int(item, k);
        if (n < 4) throw ConfigError(k + ": every N must be at least 4", e.line);
        c.sweep_n.push_back(n);
      }
      if (c.sweep_n.empty()) throw ConfigError(k + ": empty sweep list", e.line);
    };
    t["sweep.dt_over_h"] = [](RunConfig& c, const Entry& e, const std::string& k) {
      c.sweep_dt_over_h = to_double(e, k);
      if (!(c.sweep_dt_over_h > 0)) throw ConfigError(k + ": must be positive", e.line);
    };
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  try {
    scheme.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(final_time > 0)) throw ConfigError("T must be positive");
  for (double t : snapshot_times)
    if (t < 0 || t > final_time)
      throw ConfigError("snapshot time " + std::to_string(t) + " outside [0, T]");
  if (ic == InitialCondition::Manufactured) {
    if (entropy.kind() != EntropyModel::Kind::Classical)
      throw ConfigError("manufactured initial data requires the classical entropy");
    if (origin != 0.0 || length != 1.0)
      throw ConfigError("manufactured initial data requires the unit box");
  } else if (!sweep_n.empty()) {
    throw ConfigError("sweep requires manufactured initial data");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string name = trim(line.substr(0, eq));
    if (name.empty()) throw ConfigError("missing key", line_no);
    const std::string key = section.empty() ? name : section + "." + name;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'", line_no);
    if (auto [pos, inserted] = seen.emplace(key, line_no); !inserted)
      throw ConfigError("duplicate key '" + key + "' (first on line " +
                            std::to_string(pos->second) + ")",
                        line_no);
    it->second(cfg, {line.substr(eq + 1), line_no}, key);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace pks
