#include "uq/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "uq/errors.hpp"

namespace uq {

std::string to_string(Method m) {
  switch (m) {
    case Method::Mlmc: return "mlmc";
    case Method::Mc: return "mc";
    case Method::Both: return "both";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& key, const ConfigEntry& e, const std::string& what) {
  std::string where = e.line > 0 ? "line " + std::to_string(e.line) + ": " : "option: ";
  throw ConfigError(where + key + ": " + what, e.line);
}

double to_double(const std::string& key, const ConfigEntry& e) {
  const std::string v = trim(e.value);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    fail(key, e, "expected a number, got '" + e.value + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const ConfigEntry& e) {
  const std::string v = trim(e.value);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    fail(key, e, "expected an integer, got '" + e.value + "'");
  }
  return out;
}

int to_int(const std::string& key, const ConfigEntry& e, long long lo, long long hi) {
  const long long v = to_integer(key, e);
  if (v < lo || v > hi) {
    fail(key, e, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(v);
}

using Setter = std::function<void(RunConfig&, const std::string&, const ConfigEntry&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      // Selector keys, consumed before defaults are built.
      {"problem.response", [](RunConfig&, const std::string&, const ConfigEntry&) {}},
      {"problem.model", [](RunConfig&, const std::string&, const ConfigEntry&) {}},
      {"problem.material", [](RunConfig&, const std::string&, const ConfigEntry&) {}},
      {"problem.fixed_E", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.fixed_E = to_double(k, e);
       }},
      {"problem.load", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.problem.load = to_double(k, e); }},
      {"problem.nu", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.problem.nu = to_double(k, e); }},
      {"problem.rho", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.problem.rho = to_double(k, e); }},
      {"problem.eta", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.problem.eta = to_double(k, e); }},
      {"problem.max_level", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.max_level = to_int(k, e, 1, 8);
       }},
      {"problem.length", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.geometry.length = to_double(k, e);
       }},
      {"problem.height", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.geometry.height = to_double(k, e);
       }},
      {"problem.width", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.geometry.width = to_double(k, e);
       }},
      {"problem.coarse_elements_height", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.geometry.coarse_elements_height = to_int(k, e, 1, 64);
       }},
      {"plastic.sigma_y", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.sigma_y = to_double(k, e);
       }},
      {"plastic.hardening_ratio", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.hardening_ratio = to_double(k, e);
       }},
      {"plastic.load_start", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.schedule.start = to_double(k, e);
       }},
      {"plastic.load_end", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.schedule.end = to_double(k, e);
       }},
      {"plastic.load_step", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.schedule.increment = to_double(k, e);
       }},
      {"field.lambda", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.covariance.lambda = to_double(k, e);
       }},
      {"field.sigma", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.covariance.sigma = to_double(k, e);
       }},
      {"field.fraction", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.kl_fraction = to_double(k, e);
       }},
      {"field.max_terms", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.problem.kl_max_terms = to_int(k, e, 1, 100000);
       }},
      {"mlmc.epsilon", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         try {
           c.epsilons = parse_number_list(e.value);
         } catch (const ConfigError& err) {
           fail(k, e, err.what());
         }
       }},
      {"mlmc.method", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         const std::string v = trim(e.value);
         if (v == "mlmc") c.method = Method::Mlmc;
         else if (v == "mc") c.method = Method::Mc;
         else if (v == "both") c.method = Method::Both;
         else fail(k, e, "expected mlmc, mc or both");
       }},
      {"mlmc.seed", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         const long long v = to_integer(k, e);
         if (v < 0) fail(k, e, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(v);
       }},
      {"mlmc.workers", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.workers = to_int(k, e, 1, 1024); }},
      {"mlmc.trial_samples", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.trial_samples = to_int(k, e, 2, 1000000);
       }},
      {"mlmc.trial_levels", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.trial_levels = to_int(k, e, 2, 8);
       }},
      {"mlmc.screening", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         const std::string v = trim(e.value);
         if (v == "auto") c.screening = Screening::Auto;
         else if (v == "on") c.screening = Screening::On;
         else if (v == "off") c.screening = Screening::Off;
         else fail(k, e, "expected auto, on or off");
       }},
      {"mlmc.cost_model", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         const std::string v = trim(e.value);
         if (v == "work") c.cost_model = CostModel::Work;
         else if (v == "time") c.cost_model = CostModel::Time;
         else fail(k, e, "expected work or time");
       }},
      {"mlmc.qoi_node", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.qoi_node = trim(e.value) == "auto" ? -1 : to_int(k, e, 0, 1 << 30);
       }},
      {"mlmc.mc_level", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.mc_level = to_int(k, e, 0, 8); }},
      {"dynamic.frequencies", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         try {
           c.frequencies = parse_frequency_grid(e.value);
           c.frequency_spec = trim(e.value);
         } catch (const ConfigError& err) {
           fail(k, e, err.what());
         }
       }},
      {"output.directory", [](RunConfig& c, const std::string& k, const ConfigEntry& e) {
         c.output_dir = trim(e.value);
         if (c.output_dir.empty()) fail(k, e, "must not be empty");
       }},
      {"samples.level", [](RunConfig& c, const std::string& k, const ConfigEntry& e) { c.sample_level = to_int(k, e, 0, 8); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto comment = raw.find_first_of("#;");
    const std::string line = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header", line_no);
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key", line_no);
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key + "' outside a section", line_no);
    }
    const std::string full = section + "." + key;
    if (!setters().count(full)) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + full + "'", line_no);
    }
    if (out.count(full)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "' (first on line " +
                            std::to_string(out[full].line) + ")",
                        line_no);
    }
    out[full] = {trim(line.substr(eq + 1)), line_no};
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::vector<double> parse_number_list(const std::string& spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
      throw ConfigError("bad number '" + t + "' in list");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

std::vector<double> parse_frequency_grid(const std::string& spec) {
  const std::string s = trim(spec);
  if (std::count(s.begin(), s.end(), ':') == 2) {
    std::string t = s;
    std::replace(t.begin(), t.end(), ':', ',');
    const auto p = parse_number_list(t);
    const double start = p[0], stop = p[1], step = p[2];
    if (!(step > 0.0) || stop < start || start < 0.0) throw ConfigError("frequency grid needs 0 <= start <= stop and step > 0");
    const double n = (stop - start) / step;
    const long count = std::lround(std::floor(n + 1e-9)) + 1;
    if (count > 100000) throw ConfigError("frequency grid too large");
    std::vector<double> f(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) f[static_cast<std::size_t>(i)] = start + static_cast<double>(i) * step;
    return f;
  }
  auto f = parse_number_list(s);
  for (double v : f) {
    if (v < 0.0) throw ConfigError("frequencies must be non-negative");
  }
  return f;
}

RunConfig make_run_config(const ConfigMap& file, const ConfigMap& overrides, const std::string& source) {
  ConfigMap merged = file;
  for (const auto& [k, v] : overrides) {
    if (!setters().count(k)) throw ConfigError("option: unknown key '" + k + "'");
    merged[k] = v;
  }

  auto get = [&](const std::string& key) -> const ConfigEntry* {
    auto it = merged.find(key);
    return it == merged.end() ? nullptr : &it->second;
  };

  Response response = Response::StaticElastic;
  ModelKind model = ModelKind::Homogeneous;
  if (const auto* e = get("problem.response")) {
    try {
      response = parse_response(trim(e->value));
    } catch (const ConfigError& err) {
      fail("problem.response", *e, err.what());
    }
  }
  if (const auto* e = get("problem.model")) {
    try {
      model = parse_model(trim(e->value));
    } catch (const ConfigError& err) {
      fail("problem.model", *e, err.what());
    }
  }
  if (const auto* e = get("problem.fixed_E")) {
    if (model == ModelKind::Heterogeneous) fail("problem.fixed_E", *e, "a fixed modulus cannot be combined with the heterogeneous model");
    model = ModelKind::Fixed;
  }

  RunConfig c;
  c.source = source;
  c.problem = BeamProblemSpec::defaults(response, model);
  c.material = response == Response::StaticPlastic ? "steel" : "concrete";
  if (const auto* e = get("problem.material")) {
    try {
      c.problem.gamma = material_preset(trim(e->value));
      c.material = trim(e->value);
    } catch (const ConfigError& err) {
      fail("problem.material", *e, err.what());
    }
  }
  c.trial_samples = response == Response::StaticPlastic ? 24 : 200;
  if (response == Response::Dynamic) {
    c.frequency_spec = "0:400:2";
    c.frequencies = parse_frequency_grid(c.frequency_spec);
  }

  for (const auto& [key, entry] : merged) setters().at(key)(c, key, entry);

  // Re-anchor validation failures on the key responsible where possible.
  try {
    c.validate();
  } catch (const ConfigError& err) {
    const std::string msg = err.what();
    for (const auto& [key, entry] : merged) {
      const std::string name = key.substr(key.find('.') + 1);
      const bool named = msg.rfind(name + ":", 0) == 0 || msg.rfind(name + " ", 0) == 0;
      if (named && entry.line > 0) {
        throw ConfigError("line " + std::to_string(entry.line) + ": " + msg, entry.line);
      }
    }
    throw;
  }
  return c;
}

bool RunConfig::screening_enabled() const {
  switch (screening) {
    case Screening::On: return true;
    case Screening::Off: return false;
    case Screening::Auto: return problem.response == Response::Dynamic && problem.model == ModelKind::Heterogeneous;
  }
  return false;
}

void RunConfig::validate() const {
  problem.validate();
  if (epsilons.empty()) throw ConfigError("epsilon: at least one value required");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw ConfigError("epsilon: values must be positive");
  }
  const bool dynamic = problem.response == Response::Dynamic;
  if (dynamic && frequencies.empty()) throw ConfigError("frequencies: a frequency grid is required for the dynamic response");
  if (!dynamic && !frequencies.empty()) throw ConfigError("frequencies: only valid for the dynamic response");
  if (trial_levels > problem.max_level + 1) throw ConfigError("trial_levels: exceeds max_level + 1");
  if (mc_level > problem.max_level) throw ConfigError("mc_level: exceeds max_level");
  if (sample_level > problem.max_level) throw ConfigError("level: sample level exceeds max_level");
  if (qoi_node >= (problem.geometry.coarse_elements_height + 1) *
                      (static_cast<int>(std::lround(problem.geometry.length / problem.geometry.height *
                                                    problem.geometry.coarse_elements_height)) + 1)) {
    throw ConfigError("qoi_node: not a level-0 node id");
  }
}

}  // namespace uq
