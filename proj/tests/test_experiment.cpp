#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "uq/beam_problem.hpp"
#include "uq/config.hpp"
#include "uq/elastic.hpp"
#include "uq/errors.hpp"
#include "uq/experiment.hpp"

using namespace uq;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("uq_test_experiment_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig config(const std::string& text, const fs::path& out) {
  ConfigMap over;
  over["output.directory"] = {out.string(), 0};
  return make_run_config(parse_config_text(text), over);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  FAIL("missing column " << name);
  return -1;
}

}  // namespace

TEST_CASE("empirical quantiles use linear interpolation") {
  const auto q = empirical_quantiles({4.0, 1.0, 3.0, 2.0}, {0.0, 0.25, 0.5, 0.9, 1.0});
  // Sorted 1 2 3 4, h = 3p: 1, 1.75, 2.5, 3.7, 4.
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(1.75));
  CHECK(q[2] == doctest::Approx(2.5));
  CHECK(q[3] == doctest::Approx(3.7));
  CHECK(q[4] == doctest::Approx(4.0));
  CHECK(empirical_quantiles({7.0}, {0.3})[0] == 7.0);
  CHECK(std::isnan(empirical_quantiles({}, {0.5})[0]));
  CHECK_THROWS_AS(empirical_quantiles({1.0}, {1.5}), DomainError);

  const auto& levels = quantile_levels();
  REQUIRE(levels.size() == 50);
  CHECK(levels.front() == doctest::Approx(0.01));
  CHECK(levels.back() == doctest::Approx(0.99));
}

TEST_CASE("deterministic smoke run") {
  const fs::path out = scratch("fixed");
  const RunConfig cfg = config("[problem]\nmodel = homogeneous\nfixed_E = 30e9\n[mlmc]\nmethod = both\n", out);
  std::ostringstream log;
  const ExperimentOutcome res = run_experiment(cfg, log);
  CHECK(res.exit_code == kExitOk);
  for (const char* f : {"levels.csv", "rates.json", "cost.csv", "field_stats.csv", "manifest.json"}) {
    CHECK(fs::exists(out / f));
  }
  CHECK_FALSE(fs::exists(out / "frf.csv"));

  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["software"]["version"] == kVersion);
  CHECK(manifest["mesh"].size() == 5);
  CHECK(manifest["config"].is_object());

  const json rates = json::parse(slurp(out / "rates.json"));
  REQUIRE(rates.size() == 1);
  const int L = rates[0]["finest_level"];
  const int qoi = rates[0]["qoi_node"];
  const double estimate = rates[0]["estimate"];

  // Independent direct solve of the finest level with the same modulus.
  const BeamModel model(cfg.problem);
  const MeshLevel& mesh = model.mesh(L);
  const ElasticOperator op(mesh, cfg.problem.nu);
  StaticSolver direct;
  const Eigen::VectorXd u = direct.solve(op.stiffness(Eigen::VectorXd::Constant(mesh.element_count(), 30e9)),
                                         mesh.restrict_to_free(model.load(L)));
  const int dof = mesh.free_index[2 * model.level0_map(L)[qoi] + 1];
  REQUIRE(dof >= 0);
  CHECK(estimate == doctest::Approx(-u[dof]).epsilon(1e-8));
  CHECK(estimate > 0.0);

  const auto levels = read_csv(out / "levels.csv");
  const int var_y = column(levels[0], "var_Y"), n = column(levels[0], "N");
  CHECK(levels.size() == static_cast<std::size_t>(L + 2));
  for (std::size_t r = 1; r < levels.size(); ++r) {
    CHECK(std::stod(levels[r][var_y]) == 0.0);
    CHECK(std::stoll(levels[r][n]) == minimum_samples(static_cast<int>(r) - 1));
  }

  // Quantile bands of the MLMC rows come from level-0 samples, those of the MC rows from level L.
  const MeshLevel& mesh0 = model.mesh(0);
  const ElasticOperator op0(mesh0, cfg.problem.nu);
  StaticSolver direct0;
  const Eigen::VectorXd u0 = direct0.solve(op0.stiffness(Eigen::VectorXd::Constant(mesh0.element_count(), 30e9)),
                                           mesh0.restrict_to_free(model.load(0)));
  const auto stats = read_csv(out / "field_stats.csv");
  const int sd = column(stats[0], "std"), mean = column(stats[0], "mean"), node = column(stats[0], "node");
  const int est = column(stats[0], "estimator"), q01 = column(stats[0], "q01"), q99 = column(stats[0], "q99");
  CHECK(stats.size() == 1 + 2 * 41);  // MLMC and MC rows over the top edge
  for (std::size_t r = 1; r < stats.size(); ++r) {
    const double m = std::stod(stats[r][mean]);
    CHECK(std::stod(stats[r][sd]) <= 1e-6 * std::abs(m) + 1e-15);
    CHECK(stats[r][q01] == stats[r][q99]);
    double band = m;
    if (stats[r][est] == "mlmc") {
      const int d0 = mesh0.free_index[2 * std::stoi(stats[r][node]) + 1];
      band = d0 >= 0 ? -u0[d0] : 0.0;
    }
    CHECK(std::stod(stats[r][q01]) == doctest::Approx(band).epsilon(1e-8).scale(1e-12));
  }

  const auto cost = read_csv(out / "cost.csv");
  REQUIRE(cost.size() == 2);
  CHECK(std::stoll(cost[1][column(cost[0], "mc_N")]) == 1);
  CHECK(std::stod(cost[1][column(cost[0], "mc_estimate")]) == doctest::Approx(estimate).epsilon(1e-8));
  fs::remove_all(out);
}

TEST_CASE("non-convergence is flagged but the artifacts are written") {
  const fs::path out = scratch("capped");
  const RunConfig cfg =
      config("[problem]\nfixed_E = 30e9\nmax_level = 1\n[mlmc]\nepsilon = 1e-12\ntrial_levels = 2\n", out);
  std::ostringstream log;
  const ExperimentOutcome res = run_experiment(cfg, log);
  CHECK(res.exit_code == kExitNotConverged);
  CHECK_FALSE(res.converged);
  CHECK(fs::exists(out / "levels.csv"));
  const json manifest = json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "not-converged");
  CHECK(json::parse(slurp(out / "rates.json"))[0]["converged"] == false);
  fs::remove_all(out);
}

TEST_CASE("dynamic sweep writes one frf row per frequency") {
  const fs::path out = scratch("frf");
  const RunConfig cfg = config(
      "[problem]\nresponse = dynamic\nfixed_E = 30e9\nmax_level = 1\n"
      "[mlmc]\nepsilon = 1e3\ntrial_levels = 2\ntrial_samples = 2\n[dynamic]\nfrequencies = 0:400:2\n",
      out);
  std::ostringstream log;
  const ExperimentOutcome res = run_experiment(cfg, log);
  CHECK(res.exit_code == kExitOk);
  const auto frf = read_csv(out / "frf.csv");
  REQUIRE(frf.size() == 202);
  const int f = column(frf[0], "frequency"), node = column(frf[0], "qoi_node");
  CHECK(std::stod(frf[1][f]) == 0.0);
  CHECK(std::stod(frf[201][f]) == 400.0);
  for (std::size_t r = 2; r < frf.size(); ++r) CHECK(frf[r][node] == frf[1][node]);
  CHECK(json::parse(slurp(out / "rates.json")).size() == 201);
  fs::remove_all(out);
}

TEST_CASE("invalid configuration is rejected before any output") {
  const fs::path out = scratch("invalid");
  RunConfig cfg = config("", out);
  cfg.epsilons = {-1.0};
  std::ostringstream log;
  CHECK_THROWS_AS(run_experiment(cfg, log), ConfigError);
  CHECK_FALSE(fs::exists(out / "manifest.json"));
}

TEST_CASE("sample traces") {
  const fs::path out = scratch("trace");
  std::ostringstream log;

  SUBCASE("static elastic: ten deflection columns over the top edge") {
    const RunConfig cfg = config("[mlmc]\nseed = 3\n", out);
    const std::string path = emit_sample_trace(cfg, 10, log);
    const auto rows = read_csv(path);
    REQUIRE(rows.size() == 42);
    CHECK(rows[0].size() == 11);
    CHECK(rows[0][0] == "x");
    CHECK(rows[0][10] == "sample_10");
    CHECK(std::stod(rows[1][0]) == 0.0);
    CHECK(std::stod(rows[41][0]) == doctest::Approx(2.5));
    // Clamped ends, downward load: zero at the supports and positive deflection at midspan.
    CHECK(std::stod(rows[1][3]) == 0.0);
    CHECK(std::stod(rows[21][3]) > 0.0);
    CHECK(rows[21][1] != rows[21][2]);

    const std::string first = slurp(path);
    emit_sample_trace(cfg, 10, log);
    CHECK(slurp(path) == first);

    const RunConfig other = config("[mlmc]\nseed = 4\n", out);
    emit_sample_trace(other, 10, log);
    CHECK(slurp(path) != first);
  }
  SUBCASE("dynamic: FRF columns over the frequency grid") {
    const RunConfig cfg = config("[problem]\nresponse = dynamic\n[dynamic]\nfrequencies = 0:40:20\n", out);
    const auto rows = read_csv(emit_sample_trace(cfg, 3, log));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][0] == "frequency");
    CHECK(rows[0].size() == 4);
    CHECK(std::stod(rows[3][0]) == 40.0);
  }
  SUBCASE("elastoplastic: load-deflection columns") {
    const RunConfig cfg = config("[problem]\nresponse = static-plastic\n", out);
    const auto rows = read_csv(emit_sample_trace(cfg, 1, log));
    CHECK(rows[0][0] == "force");
    CHECK(rows.size() == static_cast<std::size_t>(cfg.problem.schedule.increments()) + 1);
    CHECK(std::stod(rows.back()[1]) > std::stod(rows[1][1]));
  }
  SUBCASE("count must be positive") {
    CHECK_THROWS_AS(emit_sample_trace(config("", out), 0, log), ConfigError);
  }
  fs::remove_all(out);
}

TEST_CASE("mesh info") {
  std::ostringstream os;
  print_mesh_info(config("", scratch("mesh")), os);
  const std::string s = os.str();
  CHECK(s.find("410") != std::string::npos);
  CHECK(s.find("83330") != std::string::npos);

  std::ostringstream dyn;
  print_mesh_info(config("[problem]\nresponse = dynamic\n", scratch("mesh")), dyn);
  CHECK(dyn.str().find("wavelength") != std::string::npos);
  CHECK(dyn.str().find("ok") != std::string::npos);
}
