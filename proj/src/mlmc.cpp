#include "uq/mlmc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "uq/errors.hpp"

namespace uq {

void MomentAccumulator::reset(Eigen::Index size) {
  n = 0;
  mean = Eigen::VectorXd::Zero(size);
  m2 = Eigen::VectorXd::Zero(size);
}

void MomentAccumulator::add(const Eigen::VectorXd& x) {
  if (mean.size() != x.size()) {
    if (n != 0) throw ContractError("MomentAccumulator: sample size changed");
    reset(x.size());
  }
  ++n;
  const Eigen::VectorXd delta = x - mean;
  mean += delta / static_cast<double>(n);
  m2.array() += delta.array() * (x - mean).array();
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n == 0) return;
  if (n == 0) {
    *this = other;
    return;
  }
  if (mean.size() != other.mean.size()) throw ContractError("MomentAccumulator: merge size mismatch");
  const double na = static_cast<double>(n);
  const double nb = static_cast<double>(other.n);
  const double nt = na + nb;
  const Eigen::VectorXd delta = other.mean - mean;
  mean += delta * (nb / nt);
  m2 += other.m2 + delta.cwiseAbs2() * (na * nb / nt);
  n += other.n;
}

Eigen::VectorXd MomentAccumulator::variance() const {
  if (n < 2) return Eigen::VectorXd::Zero(mean.size());
  return m2 / static_cast<double>(n - 1);
}

double MomentAccumulator::variance(Eigen::Index i) const {
  if (n < 2) return 0.0;
  return m2[i] / static_cast<double>(n - 1);
}

MomentAccumulator LevelStats::pooled_y() const {
  MomentAccumulator a = y_trial;
  a.merge(y);
  return a;
}

MomentAccumulator LevelStats::pooled_p() const {
  MomentAccumulator a = p_trial;
  a.merge(p);
  return a;
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("regression_slope: need two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

namespace {

// Slope of log2(values[l]) over l >= 1, skipping non-positive entries.
std::optional<double> log2_slope(const std::vector<double>& values) {
  std::vector<double> x, y;
  for (std::size_t l = 1; l < values.size(); ++l) {
    if (values[l] > 0.0 && std::isfinite(values[l])) {
      x.push_back(static_cast<double>(l));
      y.push_back(std::log2(values[l]));
    }
  }
  if (x.size() < 2) return std::nullopt;
  return regression_slope(x, y);
}

}  // namespace

RateEstimates estimate_rates(const std::vector<double>& mean_y, const std::vector<double>& var_y,
                             const std::vector<double>& cost, const RateEstimates& priors) {
  RateEstimates r = priors;
  r.alpha_fitted = r.beta_fitted = r.gamma_fitted = false;
  std::vector<double> abs_mean(mean_y.size());
  std::transform(mean_y.begin(), mean_y.end(), abs_mean.begin(), [](double v) { return std::abs(v); });
  if (auto s = log2_slope(abs_mean)) {
    r.alpha = -*s;
    r.alpha_fitted = true;
  }
  if (auto s = log2_slope(var_y)) {
    r.beta = -*s;
    r.beta_fitted = true;
  }
  if (auto s = log2_slope(cost)) {
    r.gamma = *s;
    r.gamma_fitted = true;
  }
  r.theorem_warning = r.alpha < 0.5 * std::min(r.beta, r.gamma);
  return r;
}

std::vector<std::int64_t> optimal_samples(const std::vector<double>& V, const std::vector<double>& C,
                                          double epsilon) {
  if (V.size() != C.size() || V.empty()) throw ContractError("optimal_samples: V and C must match and be non-empty");
  if (!(epsilon > 0.0)) throw DomainError("optimal_samples: epsilon must be positive");
  double sum = 0.0;
  for (std::size_t l = 0; l < V.size(); ++l) {
    if (!(V[l] >= 0.0) || !(C[l] > 0.0)) throw DomainError("optimal_samples: need V >= 0 and C > 0");
    sum += std::sqrt(V[l] * C[l]);
  }
  std::vector<std::int64_t> N(V.size());
  for (std::size_t l = 0; l < V.size(); ++l) {
    const double raw = 2.0 / (epsilon * epsilon) * std::sqrt(V[l] / C[l]) * sum;
    N[l] = static_cast<std::int64_t>(std::ceil(raw));
  }
  return N;
}

bool bias_converged(double mean_y_finest, double alpha, double epsilon) {
  if (!(alpha > 0.0)) throw DomainError("bias_converged: alpha must be positive");
  return std::abs(mean_y_finest) / (std::exp2(alpha) - 1.0) <= epsilon / std::sqrt(2.0);
}

ScreenDecision screen_coarsest(double var_p1, double var_y1) {
  if (!(var_y1 > 0.0)) return var_p1 > 0.0 ? ScreenDecision::Keep : ScreenDecision::Drop;
  if (!(var_p1 > 0.0)) return ScreenDecision::Drop;
  return std::log2(var_p1 / var_y1) > kScreeningThreshold ? ScreenDecision::Keep : ScreenDecision::Drop;
}

int select_qoi_node(const Eigen::VectorXd& variance, const Eigen::VectorXd& mean, int candidates) {
  if (candidates < 1 || candidates > variance.size() || candidates > mean.size()) {
    throw ContractError("select_qoi_node: bad candidate count");
  }
  int best = 0;
  for (int i = 1; i < candidates; ++i) {
    if (variance[i] > variance[best]) best = i;
  }
  if (variance[best] > 0.0) return best;
  best = 0;
  for (int i = 1; i < candidates; ++i) {
    if (std::abs(mean[i]) > std::abs(mean[best])) best = i;
  }
  return best;
}

double normalized_cost(const std::vector<std::int64_t>& N, double gamma, int coarsest) {
  double c = 0.0;
  for (std::size_t l = 0; l < N.size(); ++l) {
    c += static_cast<double>(N[l]) * std::exp2(gamma * (static_cast<int>(l) - coarsest));
  }
  return c;
}

std::int64_t minimum_samples(int level) { return level <= 2 ? 1 : 3; }

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

constexpr int kMaxAttempts = 1000;

// One successful evaluation of replicate r, redrawing with fresh attempts on SampleFailure.
void evaluate_replicate(const Sampler& sampler, Workspace& ws, int level, bool coupled, std::uint64_t seed,
                        std::uint64_t problem, std::uint64_t replicate, SampleOutput& out,
                        std::int64_t& failures) {
  for (std::uint32_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    RandomStream rng(seed, problem, level, replicate, attempt);
    try {
      sampler.evaluate(level, coupled, rng, ws, out);
      return;
    } catch (const SampleFailure&) {
      ++failures;
    }
  }
  throw NumericError("sampler failed " + std::to_string(kMaxAttempts) + " times for one replicate");
}

struct Batch {
  int level = 0;
  bool coupled = false;
  std::uint64_t problem = 0;
  std::uint64_t first = 0;
  std::int64_t count = 0;
  const std::vector<int>* extract = nullptr;  // entries of `fine` to keep per sample
  std::size_t extract_limit = 0;
};

struct BatchOutput {
  MomentAccumulator y, p, sq;
  double seconds = 0.0;
  std::int64_t failures = 0;
  std::vector<Eigen::VectorXd> kept;
};

class Executor {
 public:
  Executor(const Sampler& sampler, std::uint64_t seed, int workers, int chunk_size)
      : sampler_(sampler), seed_(seed), workers_(std::max(1, workers)), chunk_(std::max(1, chunk_size)) {
    for (int w = 0; w < workers_; ++w) workspaces_.push_back(sampler.make_workspace());
  }

  BatchOutput run(const Batch& batch) {
    const std::int64_t n_chunks = (batch.count + chunk_ - 1) / chunk_;
    std::vector<BatchOutput> chunks(static_cast<std::size_t>(n_chunks));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto work = [&](int w) {
      SampleOutput out;
      for (;;) {
        const std::int64_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        BatchOutput& acc = chunks[static_cast<std::size_t>(c)];
        const std::int64_t begin = c * chunk_;
        const std::int64_t end = std::min(batch.count, begin + chunk_);
        try {
          for (std::int64_t k = begin; k < end; ++k) {
            const double t0 = thread_cpu_seconds();
            evaluate_replicate(sampler_, *workspaces_[w], batch.level, batch.coupled, seed_, batch.problem,
                               batch.first + static_cast<std::uint64_t>(k), out, acc.failures);
            acc.seconds += thread_cpu_seconds() - t0;
            if (batch.coupled) {
              acc.y.add(out.fine - out.coarse);
              acc.sq.add(out.fine.cwiseAbs2() - out.coarse.cwiseAbs2());
            } else {
              acc.y.add(out.fine);
              acc.sq.add(out.fine.cwiseAbs2());
            }
            acc.p.add(out.fine);
            if (batch.extract && static_cast<std::size_t>(k) < batch.extract_limit) {
              Eigen::VectorXd row(batch.extract->size());
              for (std::size_t i = 0; i < batch.extract->size(); ++i) row[i] = out.fine[(*batch.extract)[i]];
              acc.kept.push_back(std::move(row));
            }
          }
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(n_chunks);
          return;
        }
      }
    };

    const int threads = static_cast<int>(std::min<std::int64_t>(workers_, n_chunks));
    if (threads <= 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    BatchOutput total;
    for (auto& c : chunks) {
      total.y.merge(c.y);
      total.p.merge(c.p);
      total.sq.merge(c.sq);
      total.seconds += c.seconds;
      total.failures += c.failures;
      for (auto& row : c.kept) total.kept.push_back(std::move(row));
    }
    return total;
  }

 private:
  const Sampler& sampler_;
  std::uint64_t seed_;
  int workers_;
  std::int64_t chunk_;
  std::vector<std::unique_ptr<Workspace>> workspaces_;
};

void log_line(const MLMCOptions& o, const std::string& s) {
  if (o.log) o.log(s);
}

void check_failures(std::int64_t failures, std::int64_t successes, const MLMCOptions& o) {
  if (failures > o.failure_allowance && static_cast<double>(failures) > 0.01 * static_cast<double>(successes)) {
    throw NumericError("sample failures (" + std::to_string(failures) + ") exceed 1% of " +
                       std::to_string(successes) + " samples");
  }
}

constexpr std::uint64_t kMcStreamTag = 0x4d4f4e5445434152ULL;

}  // namespace

DifferenceSample sample_difference(const Sampler& sampler, Workspace& ws, int level, bool coarsest,
                                   std::uint64_t seed, std::uint64_t problem_id, std::uint64_t replicate,
                                   int qoi_entry) {
  if (level < 0 || level > sampler.max_level()) throw ContractError("sample_difference: level out of range");
  if (qoi_entry < 0 || qoi_entry >= sampler.response_size()) throw ContractError("sample_difference: bad QoI entry");
  SampleOutput out;
  std::int64_t failures = 0;
  const double t0 = thread_cpu_seconds();
  evaluate_replicate(sampler, ws, level, !coarsest, seed, problem_id, replicate, out, failures);
  DifferenceSample s;
  s.seconds = thread_cpu_seconds() - t0;
  s.fine = out.fine;
  s.difference = coarsest ? out.fine : Eigen::VectorXd(out.fine - out.coarse);
  s.p = out.fine[qoi_entry];
  s.y = s.difference[qoi_entry];
  return s;
}

MLMCResult run_mlmc(const Sampler& sampler, double epsilon, const MLMCOptions& options) {
  if (!(epsilon > 0.0)) throw DomainError("run_mlmc: epsilon must be positive");
  if (options.trial_samples < 2) throw ConfigError("run_mlmc: at least 2 trial samples are needed");
  if (options.trial_levels < 2) throw ConfigError("run_mlmc: at least 2 trial levels are needed");
  const int max_level = std::min(options.max_level, sampler.max_level());
  if (max_level < 1) throw ConfigError("run_mlmc: the hierarchy needs at least two levels");
  const int size = sampler.response_size();
  if (options.qoi_entry >= size) throw ConfigError("run_mlmc: QoI entry out of range");

  const auto wall0 = std::chrono::steady_clock::now();
  Executor exec(sampler, options.seed, options.workers, options.chunk_size);

  MLMCResult res;
  res.epsilon = epsilon;
  std::vector<LevelStats> stats(static_cast<std::size_t>(max_level) + 1);
  std::vector<std::int64_t> discarded(stats.size(), 0);
  std::int64_t successes = 0;
  int coarsest = 0;
  int qoi = options.qoi_entry;

  std::vector<int> all_entries(size);
  std::iota(all_entries.begin(), all_entries.end(), 0);
  std::vector<int> quantile_entries;
  std::vector<Eigen::VectorXd> trial_rows;  // full responses of the coarsest-level trial samples
  std::vector<std::vector<double>> quantile_rows;

  auto reset_level = [&](int l) {
    stats[l] = LevelStats{};
    stats[l].level = l;
    for (auto* a : {&stats[l].y, &stats[l].p, &stats[l].sq, &stats[l].y_trial, &stats[l].p_trial}) a->reset(size);
  };
  for (int l = 0; l <= max_level; ++l) reset_level(l);

  auto draw = [&](int l, std::int64_t count, bool trial) {
    if (count <= 0) return;
    LevelStats& s = stats[l];
    Batch b;
    b.level = l;
    b.coupled = l > coarsest;
    b.problem = options.problem_id;
    // Trial replicates come first on every level; production continues the sequence.
    b.first = static_cast<std::uint64_t>(s.n_trial() + s.n());
    b.count = count;
    const std::size_t have = quantile_rows.empty() ? 0 : quantile_rows[0].size();
    if (l == coarsest && trial) {
      b.extract = &all_entries;
      b.extract_limit = static_cast<std::size_t>(count);
    } else if (l == coarsest && have < options.quantile_cap) {
      b.extract = &quantile_entries;
      b.extract_limit = options.quantile_cap - have;
    }
    BatchOutput out = exec.run(b);
    if (trial) {
      s.y_trial.merge(out.y);
      s.p_trial.merge(out.p);
    } else {
      s.y.merge(out.y);
      s.p.merge(out.p);
      s.sq.merge(out.sq);
    }
    s.cpu_seconds += out.seconds;
    s.evaluated += count;
    res.cpu_seconds += out.seconds;
    successes += count;
    res.sample_failures += out.failures;
    check_failures(res.sample_failures, successes, options);
    if (l == coarsest && trial) {
      trial_rows = std::move(out.kept);
    } else if (b.extract) {
      for (const auto& row : out.kept) {
        for (std::size_t i = 0; i < quantile_entries.size(); ++i) quantile_rows[i].push_back(row[i]);
      }
    }
  };

  auto run_trials = [&] {
    const int top = std::min(coarsest + options.trial_levels - 1, max_level);
    for (int l = coarsest; l <= top; ++l) {
      reset_level(l);
      draw(l, options.trial_samples, true);
    }
    std::ostringstream msg;
    msg << "trial samples: " << options.trial_samples << " on levels " << coarsest << ".." << top;
    log_line(options, msg.str());
    return top;
  };

  int L = run_trials();
  if (qoi < 0) {
    const auto& p0 = stats[coarsest].p_trial;
    qoi = select_qoi_node(p0.variance(), p0.mean, sampler.candidate_count());
  }

  if (options.screening && coarsest + 1 <= max_level) {
    const double vp1 = stats[coarsest + 1].p_trial.variance(qoi);
    const double vy1 = stats[coarsest + 1].y_trial.variance(qoi);
    res.screening_log_ratio = (vp1 > 0.0 && vy1 > 0.0) ? std::log2(vp1 / vy1)
                                                       : -std::numeric_limits<double>::infinity();
    const bool drop = screen_coarsest(vp1, vy1) == ScreenDecision::Drop;
    if (drop && coarsest + 2 <= max_level) {
      for (int l = coarsest; l <= L; ++l) discarded[l] += stats[l].evaluated;
      ++coarsest;
      res.coarsest_dropped = true;
      log_line(options, "screening: coarsest level discarded, log2 ratio " + std::to_string(res.screening_log_ratio));
      for (int l = 0; l <= max_level; ++l) reset_level(l);
      L = run_trials();
    } else if (drop) {
      log_line(options, "screening: drop requested but the hierarchy is too short; level kept");
    }
  }

  quantile_entries = sampler.report_entries();
  if (std::find(quantile_entries.begin(), quantile_entries.end(), qoi) == quantile_entries.end()) {
    quantile_entries.push_back(qoi);
  }
  quantile_rows.assign(quantile_entries.size(), {});
  for (const auto& row : trial_rows) {
    if (quantile_rows[0].size() >= options.quantile_cap) break;
    for (std::size_t i = 0; i < quantile_entries.size(); ++i) quantile_rows[i].push_back(row[quantile_entries[i]]);
  }
  trial_rows.clear();

  const int last_trial_level = L;
  RateEstimates rates = options.priors;
  std::vector<double> V, C;

  auto update_rates = [&] {
    std::vector<double> m, v, c;
    for (int l = coarsest; l <= L; ++l) {
      const MomentAccumulator y = stats[l].pooled_y();
      if (y.n == 0) break;
      m.push_back(y.mean[qoi]);
      v.push_back(y.variance(qoi));
      c.push_back(stats[l].seconds_per_sample());
    }
    rates = estimate_rates(m, v, c, options.priors);
  };

  auto estimate_allocation_inputs = [&] {
    V.assign(L - coarsest + 1, 0.0);
    C.assign(L - coarsest + 1, 0.0);
    const double w0 = sampler.work(coarsest);
    for (int l = coarsest; l <= L; ++l) {
      const std::size_t k = static_cast<std::size_t>(l - coarsest);
      const MomentAccumulator y = stats[l].pooled_y();
      const double vhat = y.n >= 2 ? y.variance(qoi) : std::numeric_limits<double>::quiet_NaN();
      if (l <= last_trial_level) {
        V[k] = vhat;
      } else {
        const double extrapolated = V[k - 1] * std::exp2(-rates.beta);
        V[k] = std::isnan(vhat) ? extrapolated : std::max(vhat, 0.5 * extrapolated);
      }
      const double work = (sampler.work(l) + (l > coarsest ? sampler.work(l - 1) : 0.0)) / w0;
      stats[l].work_cost = work;
      if (options.cost_model == CostModel::Work) {
        C[k] = work;
      } else {
        const double sec = stats[l].seconds_per_sample();
        C[k] = sec > 0.0 ? sec : C[k - 1] * std::exp2(rates.gamma);
      }
    }
  };

  constexpr int kMaxRounds = 200;
  for (int round = 0;; ++round) {
    if (round == kMaxRounds) throw NumericError("run_mlmc: allocation did not settle");
    update_rates();
    estimate_allocation_inputs();
    auto N = optimal_samples(V, C, epsilon);
    bool drew = false;
    for (int l = coarsest; l <= L; ++l) {
      const std::size_t k = static_cast<std::size_t>(l - coarsest);
      N[k] = std::max(N[k], minimum_samples(l));
      const std::int64_t extra = N[k] - stats[l].n();
      if (extra > 0) {
        draw(l, extra, false);
        drew = true;
      }
    }
    if (drew) continue;

    const MomentAccumulator yL = stats[L].pooled_y();
    const double alpha = std::max(rates.alpha, 0.5);
    if (bias_converged(yL.mean[qoi], alpha, epsilon)) break;
    if (L < max_level) {
      ++L;
      std::ostringstream msg;
      msg << "bias test failed at level " << L - 1 << ", adding level " << L;
      log_line(options, msg.str());
      continue;
    }
    res.converged = false;
    log_line(options, "bias test failed at the maximum level");
    break;
  }

  update_rates();
  estimate_allocation_inputs();
  res.rates = rates;
  res.coarsest_level = coarsest;
  res.finest_level = L;
  res.qoi_entry = qoi;
  res.mean = Eigen::VectorXd::Zero(size);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(size);
  std::vector<std::int64_t> n_all, n_prod;
  for (int l = 0; l <= L; ++l) {
    n_all.push_back(stats[l].evaluated + discarded[l]);
    n_prod.push_back(l >= coarsest ? stats[l].n() : 0);
  }
  for (int l = coarsest; l <= L; ++l) {
    const LevelStats& s = stats[l];
    const std::size_t k = static_cast<std::size_t>(l - coarsest);
    res.estimate += s.y.mean[qoi];
    res.mean += s.y.mean;
    second += s.sq.mean;
    LevelRow row;
    row.level = l;
    row.N = s.n();
    row.N_trial = s.n_trial();
    row.mean_y = s.y.mean[qoi];
    row.var_y = V[k];
    const MomentAccumulator p = s.pooled_p();
    row.mean_p = p.mean[qoi];
    row.var_p = p.variance(qoi);
    row.cost_norm = s.work_cost;
    row.seconds = s.seconds_per_sample();
    res.levels.push_back(row);
    res.variance_sum += V[k] / static_cast<double>(s.n());
  }
  res.stddev = (second - res.mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  res.normalized_cost = normalized_cost(n_all, rates.gamma, coarsest);
  res.normalized_cost_production = normalized_cost(n_prod, rates.gamma, coarsest);
  res.stats.assign(stats.begin() + coarsest, stats.begin() + L + 1);
  res.quantile_entries = quantile_entries;
  res.quantile_samples = std::move(quantile_rows);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

namespace {

MCResult mc_impl(const Sampler& sampler, double epsilon, int level, int qoi_entry, double gamma,
                 const MLMCOptions& options, int coarsest, bool production) {
  if (!(epsilon > 0.0)) throw DomainError("run_mc: epsilon must be positive");
  if (level < 0 || level > sampler.max_level()) throw ConfigError("run_mc: level out of range");
  if (qoi_entry < -1 || qoi_entry >= sampler.response_size()) throw ConfigError("run_mc: bad QoI entry");
  if (options.trial_samples < 2) throw ConfigError("run_mc: at least 2 pilot samples are needed");

  const auto wall0 = std::chrono::steady_clock::now();
  Executor exec(sampler, options.seed, options.workers, options.chunk_size);
  MCResult res;
  res.epsilon = epsilon;
  res.level = level;

  Batch b;
  b.level = level;
  b.coupled = false;
  b.problem = splitmix64(options.problem_id ^ kMcStreamTag);
  b.first = 0;
  b.count = options.trial_samples;
  BatchOutput pilot = exec.run(b);
  res.N_pilot = b.count;
  res.sample_failures += pilot.failures;
  res.cpu_seconds += pilot.seconds;
  check_failures(res.sample_failures, res.N_pilot, options);

  if (qoi_entry < 0) qoi_entry = select_qoi_node(pilot.p.variance(), pilot.p.mean, sampler.candidate_count());
  res.qoi_entry = qoi_entry;
  const double v = pilot.p.variance(qoi_entry);
  res.N = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * v / (epsilon * epsilon))));
  res.normalized_cost = static_cast<double>(res.N + res.N_pilot) * std::exp2(gamma * (level - coarsest));
  if (!production) {
    res.estimate = pilot.p.mean[qoi_entry];
    res.variance = v;
    res.mean = pilot.p.mean;
    res.stddev = pilot.p.variance().cwiseSqrt();
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return res;
  }
  std::vector<int> entries = sampler.report_entries();
  if (std::find(entries.begin(), entries.end(), qoi_entry) == entries.end()) entries.push_back(qoi_entry);
  b.first = static_cast<std::uint64_t>(res.N_pilot);
  b.count = res.N;
  b.extract = &entries;
  b.extract_limit = options.quantile_cap;
  BatchOutput prod = exec.run(b);
  res.sample_failures += prod.failures;
  res.cpu_seconds += prod.seconds;
  check_failures(res.sample_failures, res.N_pilot + res.N, options);

  res.estimate = prod.p.mean[qoi_entry];
  res.mean = prod.p.mean;
  res.stddev = prod.p.variance().cwiseSqrt();
  res.quantile_entries = entries;
  res.quantile_samples.assign(entries.size(), {});
  for (const auto& row : prod.kept) {
    for (std::size_t i = 0; i < entries.size(); ++i) res.quantile_samples[i].push_back(row[i]);
  }
  MomentAccumulator pooled = pilot.p;
  pooled.merge(prod.p);
  res.variance = pooled.variance(qoi_entry);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return res;
}

}  // namespace

MCResult run_mc(const Sampler& sampler, double epsilon, int level, int qoi_entry, double gamma,
                const MLMCOptions& options, int coarsest) {
  return mc_impl(sampler, epsilon, level, qoi_entry, gamma, options, coarsest, true);
}

MCResult plan_mc(const Sampler& sampler, double epsilon, int level, int qoi_entry, double gamma,
                 const MLMCOptions& options, int coarsest) {
  return mc_impl(sampler, epsilon, level, qoi_entry, gamma, options, coarsest, false);
}

}  // namespace uq
