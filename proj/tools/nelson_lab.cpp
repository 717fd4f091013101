// nelson_lab: solve Nelson-model ground states and run the infrared checks.
//
//   nelson_lab presets
//   nelson_lab sweep --preset vanhove
//   nelson_lab verify --config my.toml --out out/my --jobs 2

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "nelson/cli.hpp"
#include "nelson/errors.hpp"

namespace {

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  std::size_t jobs = 0;
  bool no_cache = false;
};

void add_common(CLI::App* sub, Common& c) {
  auto* cfg = sub->add_option("--config", c.config, "TOML or JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--preset", c.preset, "built-in configuration name")->excludes(cfg);
  sub->add_option("--out", c.out, "output directory (overrides output.dir)");
  sub->add_option("--jobs", c.jobs, "worker threads for sweep points (overrides output.jobs)")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--no-cache", c.no_cache, "do not read or write cached ground states");
}

nelson::cli::RunConfig resolve(const Common& c) {
  using namespace nelson::cli;
  if (c.config.empty() && c.preset.empty()) {
    throw nelson::ConfigError("command line", "one of --config or --preset is required");
  }
  RunConfig cfg = c.config.empty() ? load_preset(c.preset) : load_config(c.config);
  if (!c.out.empty()) cfg.out = c.out;
  if (c.jobs > 0) cfg.jobs = c.jobs;
  if (c.no_cache) cfg.cache = false;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nelson model ground states and infrared diagnostics"};
  app.require_subcommand(1);

  Common common;
  auto* presets = app.add_subcommand("presets", "list the built-in configurations");
  const char* commands[][2] = {
      {"atomic", "solve the atomic Schrodinger problem and classify the potential"},
      {"oracle", "compare a small van Hove model with its closed form"},
      {"sweep", "solve the coupled model over the infrared cutoffs and run the checks"},
      {"verify", "all checks at the first infrared cutoff"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), common);

  CLI11_PARSE(app, argc, argv);

  if (presets->parsed()) {
    for (const auto& name : nelson::cli::preset_names()) std::cout << name << '\n';
    return nelson::cli::kExitOk;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  nelson::cli::RunConfig cfg;
  try {
    cfg = resolve(common);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return nelson::cli::kExitConfig;
  }
  return nelson::cli::run_command(command, cfg, std::cerr);
}
