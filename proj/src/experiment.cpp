#include "uq/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "uq/csv.hpp"
#include "uq/errors.hpp"

namespace uq {

using nlohmann::json;
namespace fs = std::filesystem;

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

const std::vector<double>& quantile_levels() {
  static const std::vector<double> levels = [] {
    std::vector<double> q;
    for (int k = 1; k <= 99; k += 2) q.push_back(k / 100.0);
    return q;
  }();
  return levels;
}

std::vector<double> empirical_quantiles(std::vector<double> samples, const std::vector<double>& probs) {
  std::vector<double> out(probs.size(), std::numeric_limits<double>::quiet_NaN());
  if (samples.empty()) return out;
  std::sort(samples.begin(), samples.end());
  const double n1 = static_cast<double>(samples.size() - 1);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("empirical_quantiles: probability outside [0, 1]");
    const double h = n1 * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    out[i] = samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
  }
  return out;
}

namespace {

constexpr std::uint64_t kTraceProblem = 0x5452414345ULL;

std::string quantile_header() {
  std::string h;
  for (double p : quantile_levels()) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), ",q%02d", static_cast<int>(std::lround(p * 100)));
    h += buf;
  }
  return h;
}

std::string fmt(double v) { return format_double(v); }

std::string timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json mesh_table(const RunConfig& cfg) {
  json rows = json::array();
  for (int l = 0; l <= cfg.problem.max_level; ++l) {
    const MeshLevel m = build_mesh(cfg.problem.geometry, l);
    rows.push_back({{"level", l}, {"nx", m.nx}, {"ny", m.ny}, {"h", m.h}, {"dofs", m.total_dofs()},
                    {"free_dofs", m.free_dof_count}, {"elements", m.element_count()}});
  }
  return rows;
}

json config_json(const RunConfig& cfg) {
  const BeamProblemSpec& p = cfg.problem;
  json j;
  j["source"] = cfg.source;
  j["problem"] = {{"response", to_string(p.response)},
                  {"model", to_string(p.model)},
                  {"material", cfg.material},
                  {"gamma_alpha", p.gamma.alpha},
                  {"gamma_beta", p.gamma.beta},
                  {"fixed_E", p.fixed_E},
                  {"length", p.geometry.length},
                  {"height", p.geometry.height},
                  {"width", p.geometry.width},
                  {"coarse_elements_height", p.geometry.coarse_elements_height},
                  {"clamping", p.geometry.clamping == Clamping::BothEnds ? "both-ends" : "left-only"},
                  {"nu", p.nu},
                  {"rho", p.rho},
                  {"eta", p.eta},
                  {"load", p.load},
                  {"max_level", p.max_level}};
  if (p.response == Response::StaticPlastic) {
    j["plastic"] = {{"sigma_y", p.sigma_y},
                    {"hardening_ratio", p.hardening_ratio},
                    {"load_start", p.schedule.start},
                    {"load_end", p.schedule.end},
                    {"load_step", p.schedule.increment}};
  }
  if (p.model == ModelKind::Heterogeneous) {
    j["field"] = {{"lambda", p.covariance.lambda},
                  {"sigma", p.covariance.sigma},
                  {"fraction", p.kl_fraction},
                  {"max_terms", p.kl_max_terms}};
  }
  j["mlmc"] = {{"epsilon", cfg.epsilons},
               {"method", to_string(cfg.method)},
               {"seed", cfg.seed},
               {"workers", cfg.workers},
               {"trial_samples", cfg.trial_samples},
               {"trial_levels", cfg.trial_levels},
               {"screening", cfg.screening_enabled()},
               {"cost_model", cfg.cost_model == CostModel::Work ? "work" : "time"},
               {"qoi_node", cfg.qoi_node},
               {"mc_level", cfg.mc_level}};
  if (p.response == Response::Dynamic) {
    j["dynamic"] = {{"frequencies", cfg.frequency_spec}, {"count", cfg.frequencies.size()}};
  }
  j["output"] = {{"directory", cfg.output_dir}};
  return j;
}

MLMCOptions mlmc_options(const RunConfig& cfg, std::ostream& log) {
  MLMCOptions o;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  o.trial_samples = cfg.trial_samples;
  o.trial_levels = cfg.trial_levels;
  o.max_level = cfg.problem.max_level;
  o.screening = cfg.screening_enabled();
  o.cost_model = cfg.cost_model;
  o.qoi_entry = cfg.qoi_node;
  o.log = [&log](const std::string& s) { log << s << '\n' << std::flush; };
  return o;
}

// Everything produced for one (epsilon, frequency) point.
struct RunRecord {
  double epsilon = 0.0;
  std::optional<double> frequency;
  std::optional<MLMCResult> mlmc;
  std::optional<MCResult> mc;
};

// Mean, standard deviation and level-0 quantiles of one response entry.
struct EntryStats {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> quantiles;
};

enum class Estimator { Mlmc, Mc };

// Estimators present in a record, MLMC first.
std::vector<Estimator> estimators(const RunRecord& r) {
  std::vector<Estimator> e;
  if (r.mlmc) e.push_back(Estimator::Mlmc);
  if (r.mc) e.push_back(Estimator::Mc);
  return e;
}

EntryStats entry_stats(const RunRecord& r, Estimator which, int entry) {
  EntryStats s;
  const Eigen::VectorXd* mean = nullptr;
  const Eigen::VectorXd* sd = nullptr;
  const std::vector<int>* entries = nullptr;
  const std::vector<std::vector<double>>* samples = nullptr;
  if (which == Estimator::Mlmc) {
    mean = &r.mlmc->mean;
    sd = &r.mlmc->stddev;
    entries = &r.mlmc->quantile_entries;
    samples = &r.mlmc->quantile_samples;
  } else {
    mean = &r.mc->mean;
    sd = &r.mc->stddev;
    entries = &r.mc->quantile_entries;
    samples = &r.mc->quantile_samples;
  }
  s.mean = (*mean)[entry];
  s.std = (*sd)[entry];
  const auto it = std::find(entries->begin(), entries->end(), entry);
  std::vector<double> xs;
  if (it != entries->end()) xs = (*samples)[static_cast<std::size_t>(it - entries->begin())];
  s.quantiles = empirical_quantiles(std::move(xs), quantile_levels());
  return s;
}

const char* estimator_name(Estimator e) { return e == Estimator::Mlmc ? "mlmc" : "mc"; }

void append_quantiles(std::ostringstream& os, const std::vector<double>& q) {
  for (double v : q) os << ',' << fmt(v);
}

std::string levels_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream os;
  os << "epsilon,frequency,level,N,N_trial,mean_Y,var_Y,mean_P,var_P,cost_norm,seconds\n";
  for (const auto& r : runs) {
    if (!r.mlmc) continue;
    for (const auto& row : r.mlmc->levels) {
      os << fmt(r.epsilon) << ',' << (r.frequency ? fmt(*r.frequency) : "") << ',' << row.level << ','
         << row.N << ',' << row.N_trial << ',' << fmt(row.mean_y) << ',' << fmt(row.var_y) << ','
         << fmt(row.mean_p) << ',' << fmt(row.var_p) << ',' << fmt(row.cost_norm) << ',' << fmt(row.seconds)
         << '\n';
    }
  }
  return os.str();
}

json rates_json(const std::vector<RunRecord>& runs) {
  json arr = json::array();
  for (const auto& r : runs) {
    if (!r.mlmc) continue;
    const MLMCResult& m = *r.mlmc;
    json j = {{"epsilon", r.epsilon},
              {"alpha", m.rates.alpha},
              {"beta", m.rates.beta},
              {"gamma", m.rates.gamma},
              {"alpha_fitted", m.rates.alpha_fitted},
              {"beta_fitted", m.rates.beta_fitted},
              {"gamma_fitted", m.rates.gamma_fitted},
              {"theorem_warning", m.rates.theorem_warning},
              {"coarsest_level", m.coarsest_level},
              {"finest_level", m.finest_level},
              {"coarsest_dropped", m.coarsest_dropped},
              {"screening_log_ratio", m.screening_log_ratio},
              {"qoi_node", m.qoi_entry},
              {"estimate", m.estimate},
              {"converged", m.converged}};
    if (r.frequency) j["frequency"] = *r.frequency;
    arr.push_back(std::move(j));
  }
  return arr;
}

// One row per epsilon; dynamic sweeps are summed over the frequency grid.
std::string cost_csv(const std::vector<RunRecord>& runs) {
  struct Totals {
    double mlmc_s = 0, mc_s = 0, mlmc_n = 0, mc_n = 0, mlmc_w = 0, mc_w = 0, eqmax = 0;
    int finest = -1;
    std::int64_t mc_N = 0;
    double mlmc_est = std::numeric_limits<double>::quiet_NaN();
    double mc_est = std::numeric_limits<double>::quiet_NaN();
    bool have_mlmc = false, have_mc = false;
    int points = 0;
  };
  std::vector<double> order;
  std::map<double, Totals> by_eps;
  for (const auto& r : runs) {
    if (!by_eps.count(r.epsilon)) order.push_back(r.epsilon);
    Totals& t = by_eps[r.epsilon];
    ++t.points;
    if (r.mlmc) {
      const MLMCResult& m = *r.mlmc;
      t.have_mlmc = true;
      t.mlmc_s += m.cpu_seconds;
      t.mlmc_n += m.normalized_cost;
      t.mlmc_w += m.wall_seconds;
      t.finest = std::max(t.finest, m.finest_level);
      t.eqmax += m.normalized_cost_production / std::exp2(m.rates.gamma * (m.finest_level - m.coarsest_level));
      t.mlmc_est = m.estimate;
    }
    if (r.mc) {
      t.have_mc = true;
      t.mc_s += r.mc->cpu_seconds;
      t.mc_n += r.mc->normalized_cost;
      t.mc_w += r.mc->wall_seconds;
      t.mc_N += r.mc->N;
      t.mc_est = r.mc->estimate;
      if (!r.mlmc) t.finest = std::max(t.finest, r.mc->level);
    }
  }
  std::ostringstream os;
  os << "epsilon,points,mlmc_seconds,mc_seconds,mlmc_norm,mc_norm,mlmc_wall_seconds,mc_wall_seconds,"
        "finest_level,equivalent_max,mc_N,mlmc_estimate,mc_estimate\n";
  auto opt = [](bool have, double v) { return have ? fmt(v) : std::string(); };
  for (double e : order) {
    const Totals& t = by_eps[e];
    const bool single = t.points == 1;
    os << fmt(e) << ',' << t.points << ',' << opt(t.have_mlmc, t.mlmc_s) << ',' << opt(t.have_mc, t.mc_s) << ','
       << opt(t.have_mlmc, t.mlmc_n) << ',' << opt(t.have_mc, t.mc_n) << ',' << opt(t.have_mlmc, t.mlmc_w) << ','
       << opt(t.have_mc, t.mc_w) << ',' << t.finest << ',' << opt(t.have_mlmc, t.eqmax) << ','
       << (t.have_mc ? std::to_string(t.mc_N) : "") << ',' << opt(t.have_mlmc && single, t.mlmc_est) << ','
       << opt(t.have_mc && single, t.mc_est) << '\n';
  }
  return os.str();
}

std::string field_stats_csv(const std::vector<RunRecord>& runs, const BeamModel& model) {
  std::ostringstream os;
  os << "epsilon,frequency,estimator,node,x,mean,std" << quantile_header() << '\n';
  const MeshLevel& m0 = model.mesh(0);
  for (const auto& r : runs) {
    for (Estimator e : estimators(r)) {
      for (int node : model.top_edge_nodes()) {
        const EntryStats s = entry_stats(r, e, node);
        os << fmt(r.epsilon) << ',' << (r.frequency ? fmt(*r.frequency) : "") << ',' << estimator_name(e) << ','
           << node << ',' << fmt(m0.nodes(node, 0)) << ',' << fmt(s.mean) << ',' << fmt(s.std);
        append_quantiles(os, s.quantiles);
        os << '\n';
      }
    }
  }
  return os.str();
}

int qoi_of(const RunRecord& r) { return r.mlmc ? r.mlmc->qoi_entry : r.mc->qoi_entry; }

std::string curve_csv(const std::vector<RunRecord>& runs, const BeamModel& model) {
  std::ostringstream os;
  os << "epsilon,estimator,node,force,mean,std" << quantile_header() << '\n';
  const std::vector<int> column = model.midspan_column_nodes();
  const LoadSchedule& sched = model.spec().schedule;
  for (const auto& r : runs) {
    const auto it = std::find(column.begin(), column.end(), qoi_of(r));
    const int c = it != column.end() ? static_cast<int>(it - column.begin()) : static_cast<int>(column.size()) - 1;
    for (Estimator e : estimators(r)) {
      for (int i = 0; i < sched.increments(); ++i) {
        const EntryStats s = entry_stats(r, e, model.history_entry(c, i));
        os << fmt(r.epsilon) << ',' << estimator_name(e) << ',' << column[static_cast<std::size_t>(c)] << ','
           << fmt(sched.force(i + 1)) << ',' << fmt(s.mean) << ',' << fmt(s.std);
        append_quantiles(os, s.quantiles);
        os << '\n';
      }
    }
  }
  return os.str();
}

std::string frf_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream os;
  os << "epsilon,frequency,estimator,qoi_node,mean,std" << quantile_header() << '\n';
  for (const auto& r : runs) {
    const int q = qoi_of(r);
    for (Estimator e : estimators(r)) {
      const EntryStats s = entry_stats(r, e, q);
      os << fmt(r.epsilon) << ',' << fmt(*r.frequency) << ',' << estimator_name(e) << ',' << q << ','
         << fmt(s.mean) << ',' << fmt(s.std);
      append_quantiles(os, s.quantiles);
      os << '\n';
    }
  }
  return os.str();
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

}  // namespace

ExperimentOutcome run_experiment(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const auto wall0 = std::chrono::steady_clock::now();
  const std::clock_t cpu0 = std::clock();

  json manifest;
  manifest["software"] = {{"name", "uq"}, {"version", kVersion}, {"compiler", __VERSION__}};
  manifest["status"] = "running";
  manifest["started"] = timestamp();
  manifest["config"] = config_json(cfg);
  manifest["seeds"] = {{"master", cfg.seed}, {"stream", "splitmix64(seed, problem, level, replicate, attempt)"}};
  manifest["mesh"] = mesh_table(cfg);
  write_json(dir / "manifest.json", manifest);

  ExperimentOutcome outcome;
  std::vector<RunRecord> runs;
  auto finish = [&](const std::string& status) {
    manifest["status"] = status;
    manifest["finished"] = timestamp();
    manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    manifest["cpu_seconds"] = static_cast<double>(std::clock() - cpu0) / CLOCKS_PER_SEC;
    manifest["converged"] = outcome.converged;
    manifest["files"] = outcome.files;
    manifest["transform_clamps"] = transform_clamp_count();
    write_json(dir / "manifest.json", manifest);
  };

  try {
    auto model = std::make_shared<const BeamModel>(cfg.problem);
    if (model->basis()) {
      manifest["kl"] = {{"terms", model->basis()->n_terms()},
                        {"captured_fraction", model->basis()->captured_fraction}};
      log << "KL basis: " << model->basis()->n_terms() << " terms, "
          << model->basis()->captured_fraction << " of the variance\n";
    }
    const bool dynamic = cfg.problem.response == Response::Dynamic;
    const bool want_mlmc = cfg.method != Method::Mc;
    const bool want_mc = cfg.method != Method::Mlmc;
    json problems = json::array();

    for (double eps : cfg.epsilons) {
      const std::vector<double> freqs = dynamic ? cfg.frequencies : std::vector<double>{0.0};
      int fixed_qoi = cfg.qoi_node;
      for (std::size_t q = 0; q < freqs.size(); ++q) {
        RunRecord rec;
        rec.epsilon = eps;
        if (dynamic) rec.frequency = freqs[q];
        const BeamSampler sampler(model, freqs[q]);
        MLMCOptions opts = mlmc_options(cfg, log);
        opts.problem_id = dynamic ? q + 1 : 0;
        opts.qoi_entry = fixed_qoi;
        if (q == 0) problems.push_back({{"epsilon", eps}, {"problem_ids", dynamic ? "frequency index + 1" : "0"}});

        std::ostringstream head;
        head << "eps=" << eps;
        if (dynamic) head << " f=" << freqs[q] << " Hz";
        if (want_mlmc) {
          log << head.str() << ": MLMC\n" << std::flush;
          rec.mlmc = run_mlmc(sampler, eps, opts);
          const MLMCResult& m = *rec.mlmc;
          log << head.str() << ": Q=" << fmt(m.estimate) << " levels " << m.coarsest_level << ".." << m.finest_level
              << " cost " << fmt(m.normalized_cost) << (m.converged ? "" : " (not converged)") << '\n';
          if (!m.converged) outcome.converged = false;
          if (fixed_qoi < 0) fixed_qoi = m.qoi_entry;
        }
        if (want_mc) {
          const int level = want_mlmc ? rec.mlmc->finest_level : (cfg.mc_level >= 0 ? cfg.mc_level : cfg.problem.max_level);
          const double gamma = want_mlmc ? rec.mlmc->rates.gamma : opts.priors.gamma;
          const int coarsest = want_mlmc ? rec.mlmc->coarsest_level : 0;
          const int qoi = want_mlmc ? rec.mlmc->qoi_entry : fixed_qoi;
          log << head.str() << ": MC at level " << level << '\n' << std::flush;
          rec.mc = run_mc(sampler, eps, level, qoi, gamma, opts, coarsest);
          log << head.str() << ": MC Q=" << fmt(rec.mc->estimate) << " N=" << rec.mc->N << " cost "
              << fmt(rec.mc->normalized_cost) << '\n';
          if (fixed_qoi < 0) fixed_qoi = rec.mc->qoi_entry;
        }
        runs.push_back(std::move(rec));
      }
    }
    manifest["problems"] = problems;

    auto emit = [&](const std::string& name, const std::string& content) {
      write_file_atomic(dir / name, content);
      outcome.files.push_back(name);
    };
    if (want_mlmc) {
      emit("levels.csv", levels_csv(runs));
      write_json(dir / "rates.json", rates_json(runs));
      outcome.files.push_back("rates.json");
    }
    emit("cost.csv", cost_csv(runs));
    emit("field_stats.csv", field_stats_csv(runs, *model));
    if (cfg.problem.response == Response::StaticPlastic) emit("curve.csv", curve_csv(runs, *model));
    if (dynamic) emit("frf.csv", frf_csv(runs));
  } catch (const ConfigError&) {
    finish("config-error");
    throw;
  } catch (const std::exception& e) {
    manifest["error"] = e.what();
    finish("failed");
    log << "error: " << e.what() << '\n';
    outcome.exit_code = kExitNumeric;
    outcome.converged = false;
    return outcome;
  }

  finish(outcome.converged ? "ok" : "not-converged");
  outcome.files.push_back("manifest.json");
  outcome.exit_code = outcome.converged ? kExitOk : kExitNotConverged;
  return outcome;
}

std::string emit_sample_trace(const RunConfig& cfg, int count, std::ostream& log) {
  if (count < 1) throw ConfigError("count: must be at least 1");
  cfg.validate();
  const int level = cfg.sample_level;
  auto model = std::make_shared<const BeamModel>(cfg.problem);
  const BeamProblemSpec& spec = model->spec();
  const MeshLevel& m0 = model->mesh(0);
  const BeamSampler sampler(model, spec.response == Response::Dynamic ? cfg.frequencies.front() : 0.0);
  auto ws = sampler.make_workspace();

  std::vector<double> axis;
  std::vector<Eigen::VectorXd> columns;
  std::string axis_name;
  const int tip_top = m0.node_id(m0.nx, m0.ny);
  switch (spec.response) {
    case Response::StaticElastic:
      axis_name = "x";
      for (int n : model->top_edge_nodes()) axis.push_back(m0.nodes(n, 0));
      break;
    case Response::StaticPlastic:
      axis_name = "force";
      for (int i = 1; i <= spec.schedule.increments(); ++i) axis.push_back(spec.schedule.force(i));
      break;
    case Response::Dynamic:
      axis_name = "frequency";
      axis = cfg.frequencies;
      break;
  }

  for (int s = 0; s < count; ++s) {
    Eigen::VectorXd col;
    for (std::uint32_t attempt = 0;; ++attempt) {
      if (attempt >= 1000) throw NumericError("sample trace: realization failed repeatedly");
      RandomStream rng(cfg.seed, kTraceProblem, level, static_cast<std::uint64_t>(s), attempt);
      try {
        const Eigen::VectorXd E = model->young_modulus(model->draw(rng), level);
        if (spec.response == Response::Dynamic) {
          col = sampler.frf(level, E, cfg.frequencies, *ws).row(tip_top).transpose();
        } else {
          const Eigen::VectorXd r = sampler.solve(level, E, *ws);
          col.resize(static_cast<Eigen::Index>(axis.size()));
          if (spec.response == Response::StaticElastic) {
            const auto top = model->top_edge_nodes();
            for (std::size_t k = 0; k < top.size(); ++k) col[static_cast<Eigen::Index>(k)] = r[top[k]];
          } else {
            const int c = static_cast<int>(model->midspan_column_nodes().size()) - 1;
            for (int i = 0; i < spec.schedule.increments(); ++i) col[i] = r[model->history_entry(c, i)];
          }
        }
        break;
      } catch (const SampleFailure&) {
      }
    }
    columns.push_back(std::move(col));
    log << "sample " << s + 1 << "/" << count << '\n';
  }

  std::ostringstream os;
  os << axis_name;
  for (int s = 0; s < count; ++s) os << ",sample_" << s + 1;
  os << '\n';
  for (std::size_t i = 0; i < axis.size(); ++i) {
    os << fmt(axis[i]);
    for (const auto& c : columns) os << ',' << fmt(c[static_cast<Eigen::Index>(i)]);
    os << '\n';
  }
  const fs::path path = fs::path(cfg.output_dir) / "samples.csv";
  write_file_atomic(path, os.str());
  return path.string();
}

void print_mesh_info(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const BeamProblemSpec& p = cfg.problem;
  out << "response " << to_string(p.response) << ", model " << to_string(p.model) << '\n';
  out << std::left << std::setw(7) << "level" << std::setw(7) << "nx" << std::setw(6) << "ny" << std::setw(14) << "h"
      << std::setw(9) << "dofs" << std::setw(11) << "free_dofs" << "elements\n";
  for (int l = 0; l <= p.max_level; ++l) {
    const MeshLevel m = build_mesh(p.geometry, l);
    out << std::left << std::setw(7) << l << std::setw(7) << m.nx << std::setw(6) << m.ny << std::setw(14)
        << fmt(m.h) << std::setw(9) << m.total_dofs() << std::setw(11) << m.free_dof_count << m.element_count()
        << '\n';
  }
  if (p.response == Response::Dynamic) {
    const double f_max = *std::max_element(cfg.frequencies.begin(), cfg.frequencies.end());
    const double E = p.model == ModelKind::Fixed ? p.fixed_E : p.gamma.mean();
    const double w = p.geometry.width, h = p.geometry.height;
    const double h0 = build_mesh(p.geometry, 0).h;
    if (f_max > 0.0) {
      const double lambda = min_wavelength(E, w * h * h * h / 12.0, p.rho, w * h, f_max);
      const double ratio = lambda / h0;
      out << "shortest bending wavelength at " << fmt(f_max) << " Hz (E = " << fmt(E) << " Pa): " << fmt(lambda)
          << " m, " << fmt(ratio) << " level-0 elements per wavelength (" << (ratio >= 6.0 ? "ok" : "below 6")
          << ")\n";
    }
  }
}

}  // namespace uq
