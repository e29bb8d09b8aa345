#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gears/gear_model.hpp"
#include "gears/protocol.hpp"
#include "gears/relative_hamiltonian.hpp"

namespace gears {

/// Everything a `gearsim` run needs. Sweep axes left empty fall back to the
/// scalar parameter; an axis given explicitly as [] is rejected.
struct ExperimentConfig {
  int n1 = 2, n2 = 2;
  double I1 = 1.0, I2 = 1.0;
  double V0 = 10.0;
  PotentialSpec potential;

  int ell = 1;
  int num_kicks = 1;
  double delta_t = 0.0;
  int target_gear = 1;

  std::vector<int> ell_values;
  std::vector<double> delta_t_values;
  std::vector<double> V0_values;

  double t_end = 50.0;
  int t_samples = 501;
  std::vector<double> t_grid;  // overrides t_end / t_samples when non-empty

  int num_bands = 3;
  int oracle_cutoff = 24;
  int min_J = kMinimumJ;
  std::optional<double> dt;  // classical step; default 1e-3 * 2 pi / omega0
  double t_final = 100.0;    // classical trajectory length

  int workers = 1;
  std::string out_dir = ".";

  GearConfig gears() const { return {n1, n2, I1, I2, V0, potential}; }
  KickProtocol protocol() const { return {ell, num_kicks, delta_t, target_gear}; }
  std::vector<double> times() const;
  std::vector<int> ells() const { return ell_values.empty() ? std::vector<int>{ell} : ell_values; }
  std::vector<double> V0s() const { return V0_values.empty() ? std::vector<double>{V0} : V0_values; }
  std::vector<double> delta_ts() const {
    return delta_t_values.empty() ? std::vector<double>{delta_t} : delta_t_values;
  }
};

/// Parses a JSON document, applies `key=value` overrides (values are JSON,
/// or bare strings), and validates. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Resolved configuration as JSON text (round-trips through parse_config).
std::string config_to_json(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Tables

struct Null {
  bool operator==(const Null&) const = default;
};
using Cell = std::variant<double, std::int64_t, std::string, Null>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// 15 significant digits, -0 printed as 0.
std::string format_number(double x);

/// Header row, comma separated, LF line endings; Null cells print as "null" and
/// strings holding commas or quotes are double-quoted.
std::string to_csv(const Table& table);

// ---------------------------------------------------------------------------
// Subcommands

const std::vector<std::string>& subcommands();

struct RunOutput {
  std::vector<std::pair<std::string, Table>> files;  // file name, contents
  bool ok = true;                                    // false when verification failed
};

/// Runs one subcommand; sweeps are spread over config.workers threads and
/// gathered in axis order.
RunOutput run_experiment(const std::string& subcommand, const ExperimentConfig& config);

/// Writes every table plus `<subcommand>.json` holding the resolved config.
void write_outputs(const std::string& subcommand, const ExperimentConfig& config, const RunOutput& output);

}  // namespace gears
