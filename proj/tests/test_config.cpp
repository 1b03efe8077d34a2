#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "uq/config.hpp"
#include "uq/errors.hpp"

using namespace uq;

namespace {

// Line of the ConfigError thrown by f, or -1 when nothing is thrown.
template <class F>
int error_line(F&& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const ConfigError& e) {
    if (message) *message = e.what();
    return e.line();
  }
  return -1;
}

RunConfig from_text(const std::string& text, const ConfigMap& overrides = {}) {
  return make_run_config(parse_config_text(text), overrides);
}

}  // namespace

TEST_CASE("parsing sections, comments and line numbers") {
  const ConfigMap m = parse_config_text(
      "# header comment\n"
      "[problem]\n"
      "response = static-elastic   ; trailing comment\n"
      "\n"
      "[mlmc]\n"
      "  epsilon =  1e-3, 5e-4\n");
  REQUIRE(m.size() == 2);
  CHECK(m.at("problem.response").value == "static-elastic");
  CHECK(m.at("problem.response").line == 3);
  CHECK(m.at("mlmc.epsilon").value == "1e-3, 5e-4");
  CHECK(m.at("mlmc.epsilon").line == 6);
  CHECK(parse_config_text("").empty());
}

TEST_CASE("syntax errors name their line") {
  std::string msg;
  CHECK(error_line([] { parse_config_text("[mlmc]\nseed 3\n"); }, &msg) == 2);
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(error_line([] { parse_config_text("\n\n[mlmc\n"); }) == 3);
  CHECK(error_line([] { parse_config_text("seed = 3\n"); }) == 1);
  CHECK(error_line([] { parse_config_text("[mlmc]\n = 3\n"); }) == 2);
  CHECK(error_line([] { parse_config_text("[mlmc]\nseed = 1\nspeed = 2\n"); }, &msg) == 3);
  CHECK(msg.find("mlmc.speed") != std::string::npos);
  CHECK(error_line([] { parse_config_text("[mlmc]\nseed = 1\n[mlmc]\nseed = 2\n"); }, &msg) == 4);
  CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("value errors name their line and key") {
  std::string msg;
  CHECK(error_line([] { from_text("[mlmc]\n\nworkers = many\n"); }, &msg) == 3);
  CHECK(msg.find("mlmc.workers") != std::string::npos);
  CHECK(error_line([] { from_text("[mlmc]\nworkers = 0\n"); }) == 2);
  CHECK(error_line([] { from_text("[mlmc]\nmethod = quasi\n"); }) == 2);
  CHECK(error_line([] { from_text("[problem]\nresponse = torsion\n"); }) == 2);
  CHECK(error_line([] { from_text("[problem]\nmaterial = wood\n"); }) == 2);
  CHECK(error_line([] { from_text("[mlmc]\nepsilon = 1e-3, x\n"); }) == 2);
  CHECK(error_line([] { from_text("[mlmc]\nepsilon = -1e-3\n"); }, &msg) == 2);
  CHECK(msg.find("epsilon") != std::string::npos);
  CHECK(error_line([] { from_text("[problem]\nmax_level = 12\n"); }) == 2);
  CHECK(error_line([] { from_text("[mlmc]\nseed = 1.5\n"); }) == 2);
}

TEST_CASE("defaults per response") {
  const RunConfig se = from_text("");
  CHECK(se.problem.response == Response::StaticElastic);
  CHECK(se.problem.model == ModelKind::Homogeneous);
  CHECK(se.material == "concrete");
  CHECK(se.problem.gamma.alpha == doctest::Approx(7.1633));
  CHECK(se.epsilons == std::vector<double>{2.5e-4});
  CHECK(se.frequencies.empty());
  CHECK_FALSE(se.screening_enabled());

  const RunConfig pl = from_text("[problem]\nresponse = static-plastic\n");
  CHECK(pl.material == "steel");
  CHECK(pl.problem.max_level == 3);
  CHECK(pl.problem.geometry.width == doctest::Approx(1e-3));

  const RunConfig dy = from_text("[problem]\nresponse = dynamic\nmodel = heterogeneous\n");
  CHECK(dy.problem.geometry.clamping == Clamping::LeftOnly);
  CHECK(dy.frequencies.size() == 201);
  CHECK(dy.screening_enabled());
  CHECK_FALSE(from_text("[problem]\nresponse = dynamic\n[mlmc]\nscreening = off\nepsilon = 1e-2\n"
                        "[dynamic]\nfrequencies = 10\n"
                        "[problem]\nmodel = heterogeneous\n")
                  .screening_enabled());
}

TEST_CASE("frequency grids") {
  const auto f = parse_frequency_grid("0:400:2");
  REQUIRE(f.size() == 201);
  CHECK(f.front() == 0.0);
  CHECK(f.back() == 400.0);
  CHECK(parse_frequency_grid("0:400:40").size() == 11);
  CHECK(parse_frequency_grid("5, 10.5,20") == std::vector<double>{5.0, 10.5, 20.0});
  CHECK(parse_frequency_grid("0:1:0.1").size() == 11);
  CHECK_THROWS_AS(parse_frequency_grid("10:0:1"), ConfigError);
  CHECK_THROWS_AS(parse_frequency_grid("0:10:0"), ConfigError);
  CHECK_THROWS_AS(parse_frequency_grid("-5"), ConfigError);
  CHECK_THROWS_AS(parse_frequency_grid(""), ConfigError);

  const RunConfig c = from_text("[problem]\nresponse = dynamic\n[dynamic]\nfrequencies = 0:400:2\n");
  CHECK(c.frequencies.size() == 201);
  CHECK(c.frequency_spec == "0:400:2");
  // A grid only makes sense for the dynamic response.
  CHECK(error_line([] { from_text("[dynamic]\nfrequencies = 0:10:1\n"); }) == 2);
}

TEST_CASE("command-line overrides win over the file") {
  const ConfigMap file = parse_config_text("[mlmc]\nepsilon = 1e-3\nseed = 4\n[problem]\nmodel = homogeneous\n");
  ConfigMap over;
  over["mlmc.epsilon"] = {"5e-4,2.5e-4", 0};
  over["problem.model"] = {"heterogeneous", 0};
  const RunConfig c = make_run_config(file, over);
  CHECK(c.epsilons == std::vector<double>{5e-4, 2.5e-4});
  CHECK(c.seed == 4);
  CHECK(c.problem.model == ModelKind::Heterogeneous);

  ConfigMap bad;
  bad["mlmc.nope"] = {"1", 0};
  CHECK_THROWS_AS(make_run_config(file, bad), ConfigError);

  std::string msg;
  ConfigMap wrong;
  wrong["mlmc.workers"] = {"x", 0};
  CHECK(error_line([&] { make_run_config(file, wrong); }, &msg) == 0);
  CHECK(msg.find("option") != std::string::npos);
}

TEST_CASE("fixed modulus selects the deterministic model") {
  const RunConfig c = from_text("[problem]\nmodel = homogeneous\nfixed_E = 30e9\n");
  CHECK(c.problem.model == ModelKind::Fixed);
  CHECK(c.problem.fixed_E == 30e9);
  CHECK(error_line([] { from_text("[problem]\nmodel = heterogeneous\nfixed_E = 30e9\n"); }) == 3);
  CHECK(error_line([] { from_text("[problem]\nfixed_E = -1\n"); }) == 2);
}

TEST_CASE("cross-field validation") {
  CHECK(error_line([] { from_text("[problem]\nmax_level = 2\n[mlmc]\nmc_level = 3\n"); }) == 4);
  CHECK(error_line([] { from_text("[mlmc]\nqoi_node = 5000\n"); }) == 2);
  CHECK(from_text("[mlmc]\nqoi_node = auto\n").qoi_node == -1);
  CHECK(from_text("[mlmc]\nqoi_node = 204\n").qoi_node == 204);
  CHECK_THROWS_AS(from_text("[samples]\nlevel = 6\n"), ConfigError);
}

TEST_CASE("config files") {
  const auto path = std::filesystem::temp_directory_path() / "uq_test_config.ini";
  {
    std::ofstream out(path);
    out << "[problem]\nresponse = static-elastic\n[mlmc]\nworkers = 3\n";
  }
  const RunConfig c = make_run_config(read_config_file(path.string()), {}, path.string());
  CHECK(c.workers == 3);
  CHECK(c.source == path.string());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_config_file(path.string()), ConfigError);

  const auto& keys = known_config_keys();
  for (const char* k : {"problem.response", "mlmc.epsilon", "dynamic.frequencies", "output.directory"}) {
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
  }
}
