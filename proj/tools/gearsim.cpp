// gearsim <subcommand> --config <file> [--out <dir>] [--workers N] [--set key=value ...]

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "gears/errors.hpp"
#include "gears/experiment.hpp"

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kBadConfig = 2, kNumerical = 3, kOther = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum gear transmission simulator"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  int workers = 0;
  std::vector<std::string> overrides;
  for (const auto& name : gears::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "parallel sweep workers")->check(CLI::PositiveNumber);
    sub->add_option("--set", overrides, "override a config key, e.g. --set V0=40");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  if (!out_dir.empty()) overrides.push_back("out_dir=\"" + out_dir + "\"");
  if (workers > 0) overrides.push_back("workers=" + std::to_string(workers));

  try {
    const gears::ExperimentConfig config =
        config_path.empty() ? gears::parse_config("{}", overrides) : gears::load_config(config_path, overrides);
    const gears::RunOutput out = gears::run_experiment(sub, config);
    gears::write_outputs(sub, config, out);
    for (const auto& [name, table] : out.files)
      std::printf("%s: %zu rows -> %s/%s\n", sub.c_str(), table.rows.size(), config.out_dir.c_str(), name.c_str());
    if (sub == "verify") std::cout << gears::to_csv(out.files.front().second);
    return out.ok ? kOk : kCheckFailed;
  } catch (const gears::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kBadConfig;
  } catch (const gears::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
}
