#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "pks/entropy.hpp"
#include "pks/params.hpp"

namespace pks {

/// Malformed or inconsistent configuration; `line` is 0 when the problem is
/// not tied to a single line (missing keys, cross-field checks).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0);
  int line() const { return line_; }

 private:
  int line_;
};

enum class InitialCondition { Manufactured, Gaussian };

/// rho0 = amplitude_rho exp(-width |x - center|^2), phi0 likewise.
struct GaussianIc {
  double amplitude_rho = 1000.0;
  double amplitude_phi = 1.0;
  std::array<double, 3> center{0.5, 0.5, 0.5};
  double width = 100.0;
};

struct RunConfig {
  SchemeParams scheme;
  double final_time = 0.1;
  int dim = 2;
  int n = 64;
  double origin = 0.0;
  double length = 1.0;
  EntropyModel entropy = EntropyModel::classical();
  InitialCondition ic = InitialCondition::Manufactured;
  GaussianIc gaussian;
  bool sources = true;

  std::filesystem::path output_dir = "out";
  std::vector<double> snapshot_times;
  int diagnostics_every = 1;

  std::vector<int> sweep_n;
  double sweep_dt_over_h = 0.1;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Parses the INI-style format described in the README. Relative output
/// directories are kept as written.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace pks
