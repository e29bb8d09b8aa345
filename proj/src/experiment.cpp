#include "gears/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "gears/classical.hpp"
#include "gears/dynamics.hpp"
#include "gears/ergotropy.hpp"
#include "gears/errors.hpp"
#include "gears/lattice_oracle.hpp"
#include "gears/verify.hpp"

namespace gears {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

std::vector<double> ExperimentConfig::times() const {
  if (!t_grid.empty()) return t_grid;
  std::vector<double> t(static_cast<std::size_t>(t_samples));
  for (int i = 0; i < t_samples; ++i) t[static_cast<std::size_t>(i)] = t_samples == 1 ? 0.0 : t_end * i / (t_samples - 1);
  return t;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "n1",        "n2",           "I1",        "I2",      "V0",         "potential",     "ell",
      "num_kicks", "delta_t",      "target_gear", "ell_values", "delta_t_values", "V0_values", "t_end",
      "t_samples", "t_grid",       "num_bands", "oracle_cutoff", "min_J", "dt",            "t_final",
      "workers",   "out_dir"};
  return keys;
}

int as_int(const json& v, const std::string& key) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d && std::abs(d) < 1e9) return static_cast<int>(d);
  }
  throw ConfigError("'" + key + "' must be an integer");
}

double as_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

template <typename T, typename Convert>
std::vector<T> as_list(const json& v, const std::string& key, Convert convert) {
  if (!v.is_array()) throw ConfigError("'" + key + "' must be a list");
  if (v.empty()) throw ConfigError("sweep axis '" + key + "' is empty");
  std::vector<T> out;
  for (const auto& e : v) out.push_back(convert(e, key));
  return out;
}

PotentialSpec as_potential(const json& v) {
  if (!v.is_array() || v.empty()) throw ConfigError("'potential' must be a non-empty list of {p, a} harmonics");
  std::vector<PotentialSpec::Harmonic> harmonics;
  for (const auto& h : v) {
    if (!h.is_object() || h.size() != 2 || !h.contains("p") || !h.contains("a"))
      throw ConfigError("each potential harmonic must be {\"p\": int, \"a\": number}");
    harmonics.push_back({as_int(h["p"], "potential.p"), as_double(h["a"], "potential.a")});
  }
  try {
    return PotentialSpec(std::move(harmonics));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  doc[key] = std::move(value);
}

void validate(const ExperimentConfig& c) {
  const GearConfig g = c.gears();  // throws ConfigError on bad gear parameters
  try {
    c.protocol().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (c.t_samples < 1) throw ConfigError("t_samples must be >= 1");
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) throw ConfigError("t_end must be non-negative");
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    if (!(c.t_grid[i] >= 0.0) || (i > 0 && c.t_grid[i] < c.t_grid[i - 1]))
      throw ConfigError("t_grid must be sorted and non-negative");
  }
  for (double v : c.V0_values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("V0_values must be non-negative");
  for (double d : c.delta_t_values)
    if (!(d >= 0.0) || !std::isfinite(d)) throw ConfigError("delta_t_values must be non-negative");
  if (c.num_bands < 1) throw ConfigError("num_bands must be >= 1");
  if (c.oracle_cutoff < c.n1 + c.n2) throw ConfigError("oracle_cutoff must be >= n1 + n2");
  if (c.min_J < 1) throw ConfigError("min_J must be >= 1");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) throw ConfigError("t_final must be positive");
  if (c.workers < 1) throw ConfigError("workers must be >= 1");
  if (c.out_dir.empty()) throw ConfigError("out_dir must not be empty");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text, const std::vector<std::string>& overrides) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON");
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(doc, o);

  ExperimentConfig c;
  for (const auto& [key, v] : doc.items()) {
    if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    if (key == "n1") c.n1 = as_int(v, key);
    else if (key == "n2") c.n2 = as_int(v, key);
    else if (key == "I1") c.I1 = as_double(v, key);
    else if (key == "I2") c.I2 = as_double(v, key);
    else if (key == "V0") c.V0 = as_double(v, key);
    else if (key == "potential") c.potential = as_potential(v);
    else if (key == "ell") c.ell = as_int(v, key);
    else if (key == "num_kicks") c.num_kicks = as_int(v, key);
    else if (key == "delta_t") c.delta_t = as_double(v, key);
    else if (key == "target_gear") c.target_gear = as_int(v, key);
    else if (key == "ell_values") c.ell_values = as_list<int>(v, key, as_int);
    else if (key == "delta_t_values") c.delta_t_values = as_list<double>(v, key, as_double);
    else if (key == "V0_values") c.V0_values = as_list<double>(v, key, as_double);
    else if (key == "t_end") c.t_end = as_double(v, key);
    else if (key == "t_samples") c.t_samples = as_int(v, key);
    else if (key == "t_grid") c.t_grid = as_list<double>(v, key, as_double);
    else if (key == "num_bands") c.num_bands = as_int(v, key);
    else if (key == "oracle_cutoff") c.oracle_cutoff = as_int(v, key);
    else if (key == "min_J") c.min_J = as_int(v, key);
    else if (key == "dt") c.dt = v.is_null() ? std::nullopt : std::optional<double>(as_double(v, key));
    else if (key == "t_final") c.t_final = as_double(v, key);
    else if (key == "workers") c.workers = as_int(v, key);
    else if (key == "out_dir") {
      if (!v.is_string()) throw ConfigError("'out_dir' must be a string");
      c.out_dir = v.get<std::string>();
    }
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["n1"] = c.n1;
  doc["n2"] = c.n2;
  doc["I1"] = c.I1;
  doc["I2"] = c.I2;
  doc["V0"] = c.V0;
  json potential = json::array();
  for (const auto& h : c.potential.harmonics()) potential.push_back({{"p", h.p}, {"a", h.a}});
  doc["potential"] = potential;
  doc["ell"] = c.ell;
  doc["num_kicks"] = c.num_kicks;
  doc["delta_t"] = c.delta_t;
  doc["target_gear"] = c.target_gear;
  if (!c.ell_values.empty()) doc["ell_values"] = c.ell_values;
  if (!c.delta_t_values.empty()) doc["delta_t_values"] = c.delta_t_values;
  if (!c.V0_values.empty()) doc["V0_values"] = c.V0_values;
  doc["t_end"] = c.t_end;
  doc["t_samples"] = c.t_samples;
  if (!c.t_grid.empty()) doc["t_grid"] = c.t_grid;
  doc["num_bands"] = c.num_bands;
  doc["oracle_cutoff"] = c.oracle_cutoff;
  doc["min_J"] = c.min_J;
  if (c.dt) doc["dt"] = *c.dt;
  doc["t_final"] = c.t_final;
  doc["workers"] = c.workers;
  doc["out_dir"] = c.out_dir;
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Tables

std::string format_number(double x) {
  if (x == 0.0) return "0";  // also folds -0
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

namespace {

struct CellPrinter {
  std::string operator()(double x) const { return format_number(x); }
  std::string operator()(std::int64_t x) const { return std::to_string(x); }
  std::string operator()(const std::string& s) const {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return quoted + "\"";
  }
  std::string operator()(Null) const { return "null"; }
};

Cell optional_cell(const std::optional<double>& x) { return x ? Cell{*x} : Cell{Null{}}; }
Cell int_cell(std::int64_t x) { return Cell{x}; }

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + table.header[i];
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + std::visit(CellPrinter{}, row[i]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

// Evaluates f(0..count-1) on a fixed pool; results keep index order and the
// first exception (by index) is rethrown.
template <typename F>
auto parallel_map(std::size_t count, int workers, F&& f) {
  using T = decltype(f(std::size_t{}));
  std::vector<std::optional<T>> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        results[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (n <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n; ++w) pool.emplace_back(work);
  }
  std::vector<T> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*results[i]));
  }
  return out;
}

Table run_bands(const ExperimentConfig& c) {
  const BandStructure bs = band_structure(derive_geometry(c.gears()), c.num_bands, c.min_J);
  Table t{{"k", "band", "energy"}, {}};
  for (const auto& e : bs.entries) t.rows.push_back({to_double(e.k), int_cell(e.band), e.energy});
  return t;
}

Table run_transmission(const ExperimentConfig& c) {
  struct Point {
    double V0;
    int ell;
  };
  std::vector<Point> points;
  for (double V0 : c.V0s())
    for (int ell : c.ells()) points.push_back({V0, ell});

  auto rows = parallel_map(points.size(), c.workers, [&](std::size_t i) {
    const GearConfig g = c.gears().with_V0(points[i].V0);
    KickProtocol p = c.protocol();
    p.ell = points[i].ell;
    const TransmissionResult q = transmission_ratio(g, p);
    const TransmissionResult cl = classical_transmission(g, p);
    return std::vector<Cell>{points[i].V0,    int_cell(p.ell), optional_cell(q.r), q.L1_bar,
                             q.L2_bar,        q.averaging_period, optional_cell(cl.r), derive_geometry(g).r_cl};
  });
  return {{"V0", "ell", "r", "L1_bar", "L2_bar", "averaging_period", "r_classical", "r_cl"}, std::move(rows)};
}

Table run_occupations(const ExperimentConfig& c) {
  const RotorState state = prepare(c.gears(), c.protocol());
  Table t{{"energy", "k", "parity", "probability", "kinetic"}, {}};
  for (const auto& o : spectrum_occupations(state))
    t.rows.push_back({o.energy, to_double(o.k), int_cell(o.parity), o.probability, o.kinetic});
  return t;
}

Table run_evolve(const ExperimentConfig& c) {
  const TimeSeries ts = time_series(prepare(c.gears(), c.protocol()), c.times());
  Table t{{"t", "L1", "L2", "L1_sq", "L2_sq", "L_r", "L_c", "H_r", "norm"}, {}};
  for (std::size_t i = 0; i < ts.t.size(); ++i) {
    const auto& o = ts.values[i];
    t.rows.push_back({ts.t[i], o.L1, o.L2, o.L1_sq, o.L2_sq, o.L_r, o.L_c, o.H_r, o.norm});
  }
  return t;
}

Table run_ergotropy(const ExperimentConfig& c) {
  Table t{{"t", "ergotropy", "kinetic", "net_kinetic", "ergotropy_ratio", "net_ratio"}, {}};
  for (const auto& s : ergotropy_time_series(c.gears(), c.protocol(), c.times())) {
    const auto& r = s.report;
    t.rows.push_back({s.t, r.ergotropy, r.kinetic, r.net_kinetic, optional_cell(r.ergotropy_ratio),
                      optional_cell(r.net_ratio)});
  }
  return t;
}

Table run_multikick(const ExperimentConfig& c) {
  const auto dts = c.delta_ts();
  auto rows = parallel_map(dts.size(), c.workers, [&](std::size_t i) {
    const TransmissionResult q = transmission_ratio(c.gears(), KickProtocol::quanta(c.ell, dts[i], c.target_gear));
    return std::vector<Cell>{dts[i], int_cell(c.ell), optional_cell(q.r), q.L1_bar, q.L2_bar};
  });
  return {{"delta_t", "ell", "r", "L1_bar", "L2_bar"}, std::move(rows)};
}

std::vector<std::pair<std::string, Table>> run_classical(const ExperimentConfig& c) {
  const GearConfig g = c.gears();
  const DerivedGeometry geom = derive_geometry(g);
  const auto ells = c.ells();
  auto rows = parallel_map(ells.size(), c.workers, [&](std::size_t i) {
    KickProtocol p = c.protocol();
    p.ell = ells[i];
    const TransmissionResult r = classical_transmission(g, p);
    return std::vector<Cell>{int_cell(p.ell), optional_cell(r.r), r.L1_bar, r.L2_bar, r.L_r_bar, r.averaging_period};
  });
  Table sweep{{"ell", "r", "L1_bar", "L2_bar", "L_r_bar", "period"}, std::move(rows)};

  const Thresholds th = interlock_threshold(geom);
  Table thresholds{{"r_cl", "L_r_star", "ell_star", "omega0"}, {{geom.r_cl, th.L_r_star, th.ell_star, geom.omega0}}};

  const ClassicalState start = classical_after_protocol(g, c.protocol());
  const double dt = c.dt ? *c.dt : (geom.omega0 > 0 ? 1e-3 * 2.0 * std::numbers::pi / geom.omega0 : 1e-3);
  const auto steps = static_cast<long>(std::ceil(c.t_final / dt));
  const int record_every = static_cast<int>(std::max<long>(1, steps / 1000));
  const Trajectory traj = simulate_relative(start, geom, start.time + c.t_final, dt, record_every);
  Table trajectory{{"t", "theta_r", "L_r", "L1", "L2", "energy"}, {}};
  for (const auto& s : traj.samples) {
    const auto [L1, L2] = angular_momentum_split(s.L_c, s.L_r, geom);
    trajectory.rows.push_back({s.time, s.theta_r, s.L_r, L1, L2, relative_energy(s, geom)});
  }
  return {{"classical.csv", std::move(sweep)},
          {"classical_thresholds.csv", std::move(thresholds)},
          {"classical_trajectory.csv", std::move(trajectory)}};
}

Table run_oracle(const ExperimentConfig& c) {
  const auto times = c.times();
  const oracle::OracleSeries os = oracle::oracle_run(c.gears(), c.protocol(), times, c.oracle_cutoff);
  const TimeSeries ts = time_series(prepare(c.gears(), c.protocol()), times);
  Table t{{"t", "L1", "L2", "L2_sq", "norm", "boundary", "L1_pipeline", "L2_pipeline", "L2_sq_pipeline"}, {}};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto& o = os.values[i];
    const auto& p = ts.values[i];
    t.rows.push_back({times[i], o.L1, o.L2, o.L2_sq, o.norm, o.boundary, p.L1, p.L2, p.L2_sq});
  }
  return t;
}

Table run_verify(bool& ok) {
  Table t{{"criterion", "name", "status", "detail"}, {}};
  ok = true;
  for (const auto& r : run_acceptance_checks()) {
    ok = ok && r.passed;
    t.rows.push_back({int_cell(r.id), r.name, std::string(r.passed ? "PASS" : "FAIL"), r.detail});
  }
  return t;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"bands",     "transmission", "occupations", "evolve", "ergotropy",
                                              "multikick", "classical",    "oracle",      "verify"};
  return names;
}

RunOutput run_experiment(const std::string& sub, const ExperimentConfig& c) {
  RunOutput out;
  if (sub == "bands") out.files.emplace_back("bands.csv", run_bands(c));
  else if (sub == "transmission") out.files.emplace_back("transmission.csv", run_transmission(c));
  else if (sub == "occupations") out.files.emplace_back("occupations.csv", run_occupations(c));
  else if (sub == "evolve") out.files.emplace_back("evolve.csv", run_evolve(c));
  else if (sub == "ergotropy") out.files.emplace_back("ergotropy.csv", run_ergotropy(c));
  else if (sub == "multikick") out.files.emplace_back("multikick.csv", run_multikick(c));
  else if (sub == "classical") out.files = run_classical(c);
  else if (sub == "oracle") out.files.emplace_back("oracle.csv", run_oracle(c));
  else if (sub == "verify") out.files.emplace_back("verify.csv", run_verify(out.ok));
  else throw ConfigError("unknown subcommand '" + sub + "'");
  return out;
}

void write_outputs(const std::string& sub, const ExperimentConfig& c, const RunOutput& output) {
  namespace fs = std::filesystem;
  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    f << text;
  };
  for (const auto& [name, table] : output.files) write(name, to_csv(table));
  write(sub + ".json", config_to_json(c));
}

}  // namespace gears
