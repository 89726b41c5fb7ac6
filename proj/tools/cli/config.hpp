#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blayer/existence_engine.hpp"

namespace blayer::cli {

/// Invalid configuration; the message names the file line or flag and the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

struct RunConfig {
  std::optional<double> gamma, R, mu, kappa;
  std::optional<double> v_minus, u_minus, theta_minus;
  std::optional<double> v_plus, u_plus, theta_plus;
  double tol_member = 1e-6;
  double tol_mach = kDefaultTolMach;
  double tol_flux = kDefaultTolFlux;
  std::filesystem::path out = ".";
  Format format = Format::Csv;

  int trajectories = 4;  ///< portrait: generic trajectories per grid side
  double mach_min = 0.34;
  double mach_max = 1.335;
  int points = 200;
  int threads = 0;  ///< sweep workers, 0 = hardware concurrency

  /// Where each field was last set ("file.ini:3" or "--gamma").
  std::map<std::string, std::string> origin;

  GasParams gas() const;
  EndState left() const;   ///< v- defaults to the flux-compatible u- v+/u+
  EndState right() const;
  Tolerances tolerances() const;
};

/// Config keys, in the order flags are registered. Dashes and underscores
/// are interchangeable in files.
const std::vector<std::string>& config_keys();

/// Sets one field from text; `where` is used in diagnostics.
void apply(RunConfig& cfg, const std::string& key, const std::string& value, const std::string& where);

/// Flat key = value file: blank lines, '#' or ';' comments and [section]
/// headers are ignored.
void load_file(RunConfig& cfg, const std::filesystem::path& path);

/// Fields a command needs; throws ConfigError naming the first missing one.
void require(const RunConfig& cfg, const std::vector<std::string>& keys);

}  // namespace blayer::cli
