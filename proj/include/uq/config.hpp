#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uq/beam_problem.hpp"
#include "uq/mlmc.hpp"

namespace uq {

enum class Method { Mlmc, Mc, Both };
enum class Screening { Auto, On, Off };

std::string to_string(Method m);

struct RunConfig {
  BeamProblemSpec problem;
  std::string material = "concrete";
  std::vector<double> epsilons{2.5e-4};
  Method method = Method::Mlmc;
  std::uint64_t seed = 1;
  int workers = 1;
  int trial_samples = 200;
  int trial_levels = 3;
  Screening screening = Screening::Auto;
  CostModel cost_model = CostModel::Work;
  int qoi_node = -1;       // level-0 node id, -1 selects by variance
  int mc_level = -1;       // MC-only runs; -1 uses max_level
  std::vector<double> frequencies;
  std::string frequency_spec;
  std::string output_dir = "uq-out";
  int sample_level = 0;
  std::string source;      // config file, empty when none

  /// Throws ConfigError: epsilon > 0, frequency grid present iff the response is dynamic, ...
  void validate() const;
  bool screening_enabled() const;
};

/// Flat `key = value` text with `[section]` headers; '#' and ';' start comments.
/// Keys are addressed as "section.key". Values keep the line they came from.
struct ConfigEntry {
  std::string value;
  int line = 0;  // 0 for command-line overrides
};
using ConfigMap = std::map<std::string, ConfigEntry>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap read_config_file(const std::string& path);

/// Builds a RunConfig from file entries and overrides (overrides win). The response, model and
/// material keys select defaults first; every other key is then applied on top.
RunConfig make_run_config(const ConfigMap& file, const ConfigMap& overrides, const std::string& source = {});

/// "start:stop:step" (inclusive) or a comma-separated list, in Hz.
std::vector<double> parse_frequency_grid(const std::string& spec);
std::vector<double> parse_number_list(const std::string& spec);

/// Every accepted key, for help output and tests.
const std::vector<std::string>& known_config_keys();

}  // namespace uq
