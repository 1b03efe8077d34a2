#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "uq/config.hpp"
#include "uq/errors.hpp"
#include "uq/experiment.hpp"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

// Command-line flags and the config keys they override.
constexpr FlagSpec kRunFlags[] = {
    {"--response", "problem.response", "static-elastic | static-plastic | dynamic"},
    {"--model", "problem.model", "homogeneous | heterogeneous | fixed"},
    {"--material", "problem.material", "concrete | steel"},
    {"--fixed-E", "problem.fixed_E", "deterministic Young's modulus (Pa); selects the fixed model"},
    {"--load", "problem.load", "total transverse load (N)"},
    {"--max-level", "problem.max_level", "finest admissible level"},
    {"--epsilon", "mlmc.epsilon", "RMSE target(s), comma separated"},
    {"--method", "mlmc.method", "mlmc | mc | both"},
    {"--seed", "mlmc.seed", "master seed"},
    {"--workers", "mlmc.workers", "worker threads"},
    {"--trial-samples", "mlmc.trial_samples", "trial samples per level"},
    {"--screening", "mlmc.screening", "auto | on | off"},
    {"--qoi-node", "mlmc.qoi_node", "level-0 node id of the QoI (-1 selects by variance)"},
    {"--cost-model", "mlmc.cost_model", "work | time"},
    {"--mc-level", "mlmc.mc_level", "level of MC-only runs"},
    {"--freq", "dynamic.frequencies", "frequency grid start:stop:step or list (Hz)"},
    {"--output", "output.directory", "output directory"},
};

struct Overrides {
  std::map<std::string, std::string> values;

  void bind(CLI::App* app) {
    for (const auto& f : kRunFlags) app->add_option(f.flag, values[f.key], f.help);
  }

  uq::ConfigMap map(const CLI::App* app) const {
    uq::ConfigMap out;
    for (const auto& f : kRunFlags) {
      if (app->count(f.flag) > 0) out[f.key] = uq::ConfigEntry{values.at(f.key), 0};
    }
    return out;
  }
};

uq::RunConfig load(const std::string& path, const uq::ConfigMap& overrides) {
  uq::ConfigMap file;
  if (!path.empty()) file = uq::read_config_file(path);
  return uq::make_run_config(file, overrides, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel Monte Carlo for beams with random Young's modulus"};
  app.set_version_flag("--version", std::string(uq::kVersion));
  app.require_subcommand(1);

  std::string run_config, samples_config, mesh_config;
  Overrides run_over, samples_over;
  int count = 10;
  int level = -1;

  CLI::App* run = app.add_subcommand("run", "run MLMC and/or MC and write the result artifacts");
  run->add_option("config", run_config, "config file (optional)");
  run_over.bind(run);

  CLI::App* samples = app.add_subcommand("samples", "write individual realizations to samples.csv");
  samples->add_option("config", samples_config, "config file (optional)");
  samples->add_option("--count", count, "number of realizations")->check(CLI::PositiveNumber);
  samples->add_option("--level", level, "mesh level of the realizations (default 0)");
  samples_over.bind(samples);

  CLI::App* mesh = app.add_subcommand("mesh-info", "print the mesh hierarchy");
  mesh->add_option("config", mesh_config, "config file (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? uq::kExitOk : uq::kExitConfig;
  }

  std::string source;
  try {
    if (*run) {
      source = run_config;
      const uq::RunConfig cfg = load(run_config, run_over.map(run));
      const uq::ExperimentOutcome out = uq::run_experiment(cfg, std::cerr);
      for (const auto& f : out.files) std::cout << cfg.output_dir << '/' << f << '\n';
      if (out.exit_code == uq::kExitNotConverged) std::cerr << "warning: MLMC did not converge within max_level\n";
      return out.exit_code;
    }
    if (*samples) {
      source = samples_config;
      uq::ConfigMap over = samples_over.map(samples);
      if (level >= 0) over["samples.level"] = uq::ConfigEntry{std::to_string(level), 0};
      const uq::RunConfig cfg = load(samples_config, over);
      std::cout << uq::emit_sample_trace(cfg, count, std::cerr) << '\n';
      return uq::kExitOk;
    }
    source = mesh_config;
    uq::print_mesh_info(load(mesh_config, {}), std::cout);
    return uq::kExitOk;
  } catch (const uq::ConfigError& e) {
    std::cerr << (source.empty() ? std::string("config") : source) << ": " << e.what() << '\n';
    return uq::kExitConfig;
  } catch (const uq::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return uq::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return uq::kExitNumeric;
  }
}
