#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uq/rng.hpp"

namespace uq {

/// Per-thread scratch state owned by a worker (solvers with cached symbolic analysis, ...).
class Workspace {
 public:
  virtual ~Workspace() = default;
};

/// Responses of one draw. Both vectors use the sampler's response layout.
struct SampleOutput {
  Eigen::VectorXd fine;
  Eigen::VectorXd coarse;  // empty when the draw was not coupled
};

/// A hierarchy of discretizations of one random response.
///
/// The response is a vector whose first candidate_count() entries are the nodal values on the
/// level-0 node grid (the QoI is chosen among them); further entries are free for extra outputs.
class Sampler {
 public:
  virtual ~Sampler() = default;

  virtual int max_level() const = 0;
  virtual int response_size() const = 0;
  virtual int candidate_count() const = 0;
  /// Work of one solve on `level` (element count); only ratios matter.
  virtual double work(int level) const = 0;
  /// Entries whose level-0 samples are kept for empirical quantiles.
  virtual std::vector<int> report_entries() const { return {}; }

  virtual std::unique_ptr<Workspace> make_workspace() const = 0;

  /// Draws the random input from `rng` once and evaluates the response on `level` and, if
  /// `coupled`, on `level - 1` with the same input. Throws SampleFailure for a bad realization.
  virtual void evaluate(int level, bool coupled, RandomStream& rng, Workspace& ws, SampleOutput& out) const = 0;
};

/// Streaming mean and sum of squared deviations for a vector of entries.
struct MomentAccumulator {
  std::int64_t n = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  void reset(Eigen::Index size);
  void add(const Eigen::VectorXd& x);
  /// Order-dependent in floating point; merge in a fixed order for reproducible results.
  void merge(const MomentAccumulator& other);
  /// Unbiased variance (N - 1); zero when fewer than two samples.
  Eigen::VectorXd variance() const;
  double variance(Eigen::Index i) const;
};

struct LevelStats {
  int level = 0;
  /// Production samples: Y = P_l - P_{l-1}, P_l and P_l^2 - P_{l-1}^2 per entry.
  MomentAccumulator y, p, sq;
  /// Trial samples, kept apart so they stay out of the estimate and the N table.
  MomentAccumulator y_trial, p_trial;
  double cpu_seconds = 0.0;       // all samples on this level, trial included
  std::int64_t evaluated = 0;     // successful samples, trial included
  double work_cost = 0.0;         // normalized work of one coupled sample

  std::int64_t n() const { return y.n; }
  std::int64_t n_trial() const { return y_trial.n; }
  MomentAccumulator pooled_y() const;
  MomentAccumulator pooled_p() const;
  double seconds_per_sample() const { return evaluated > 0 ? cpu_seconds / evaluated : 0.0; }
};

struct RateEstimates {
  double alpha = 2.0;
  double beta = 3.0;
  double gamma = 2.0;
  bool alpha_fitted = false;
  bool beta_fitted = false;
  bool gamma_fitted = false;
  /// alpha >= min(beta, gamma) / 2 fails.
  bool theorem_warning = false;
};

/// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Rates from log2 regressions over levels >= 1 (relative to the coarsest) of |mean Y|, V[Y] and
/// the seconds per sample. Levels with zero mean, variance or cost are skipped; a rate with fewer
/// than two usable levels keeps its prior.
RateEstimates estimate_rates(const std::vector<double>& mean_y, const std::vector<double>& var_y,
                             const std::vector<double>& cost, const RateEstimates& priors = {});

/// N_l = ceil((2 / eps^2) sqrt(V_l / C_l) sum_k sqrt(V_k C_k)). V_l may be zero (gives N_l = 0).
std::vector<std::int64_t> optimal_samples(const std::vector<double>& V, const std::vector<double>& C,
                                          double epsilon);

/// |mean Y_L| / (2^alpha - 1) <= eps / sqrt(2).
bool bias_converged(double mean_y_finest, double alpha, double epsilon);

enum class ScreenDecision { Keep, Drop };
inline constexpr double kScreeningThreshold = 2.3;

/// Keep the coarsest level iff log2(V[P_1] / V[P_1 - P_0]) > 2.3.
ScreenDecision screen_coarsest(double var_p1, double var_y1);

/// Entry with the largest variance among the first `candidates` entries, lowest index on ties.
/// When every variance is zero, the entry with the largest |mean| instead.
int select_qoi_node(const Eigen::VectorXd& variance, const Eigen::VectorXd& mean, int candidates);

/// sum_l N_l 2^(gamma (l - coarsest)).
double normalized_cost(const std::vector<std::int64_t>& N, double gamma, int coarsest = 0);

enum class CostModel { Work, Time };

struct MLMCOptions {
  std::uint64_t seed = 1;
  std::uint64_t problem_id = 0;
  int workers = 1;
  int trial_samples = 200;
  int trial_levels = 3;
  int max_level = 4;
  bool screening = false;
  CostModel cost_model = CostModel::Work;
  RateEstimates priors{};
  /// Fixed QoI entry; -1 selects it from the level-0 trial variance.
  int qoi_entry = -1;
  std::size_t quantile_cap = 20000;
  /// Abort once failures exceed both this count and 1% of the successful samples.
  int failure_allowance = 10;
  int chunk_size = 64;
  std::function<void(const std::string&)> log;
};

/// Declared floor on N_l: 1 sample on levels up to 2, 3 above.
std::int64_t minimum_samples(int level);

struct LevelRow {
  int level = 0;
  std::int64_t N = 0;
  std::int64_t N_trial = 0;
  double mean_y = 0.0;       // production samples; sums to the estimate
  double var_y = 0.0;        // pooled trial + production, as used for allocation
  double mean_p = 0.0;       // pooled
  double var_p = 0.0;        // pooled
  double cost_norm = 0.0;    // work per coupled sample, coarsest level = 1
  double seconds = 0.0;      // CPU seconds per sample
};

struct MLMCResult {
  double epsilon = 0.0;
  double estimate = 0.0;
  Eigen::VectorXd mean;      // per entry
  Eigen::VectorXd stddev;    // per entry, from the telescoped second moment
  std::vector<LevelRow> levels;
  std::vector<LevelStats> stats;
  RateEstimates rates;
  int coarsest_level = 0;
  int finest_level = 0;
  int qoi_entry = 0;
  bool converged = true;
  bool coarsest_dropped = false;
  double screening_log_ratio = 0.0;
  double variance_sum = 0.0;     // sum V_l / N_l
  double normalized_cost = 0.0;  // trial samples included
  double normalized_cost_production = 0.0;
  double cpu_seconds = 0.0;
  double wall_seconds = 0.0;
  std::int64_t sample_failures = 0;
  /// Coarsest-level samples at report entries (rows) for empirical quantiles.
  std::vector<int> quantile_entries;
  std::vector<std::vector<double>> quantile_samples;
};

/// Y = P_l - P_{l-1} for replicate r, driven by a single draw; P_{-1} = 0 on the coarsest level.
struct DifferenceSample {
  double y = 0.0;
  double p = 0.0;
  Eigen::VectorXd difference;
  Eigen::VectorXd fine;
  double seconds = 0.0;
};
DifferenceSample sample_difference(const Sampler& sampler, Workspace& ws, int level, bool coarsest,
                                   std::uint64_t seed, std::uint64_t problem_id, std::uint64_t replicate,
                                   int qoi_entry);

MLMCResult run_mlmc(const Sampler& sampler, double epsilon, const MLMCOptions& options);

struct MCResult {
  double epsilon = 0.0;
  int level = 0;
  double estimate = 0.0;
  double variance = 0.0;
  int qoi_entry = 0;
  std::int64_t N = 0;
  std::int64_t N_pilot = 0;
  double normalized_cost = 0.0;  // pilot included
  double cpu_seconds = 0.0;
  double wall_seconds = 0.0;
  std::int64_t sample_failures = 0;
  Eigen::VectorXd mean;    // per entry, production samples
  Eigen::VectorXd stddev;
  std::vector<int> quantile_entries;
  std::vector<std::vector<double>> quantile_samples;
};

/// Plain Monte Carlo at one level: pilot of options.trial_samples, then N = ceil(2 V / eps^2).
/// Cost is normalized by 2^(gamma (level - coarsest)). Uses a stream disjoint from run_mlmc.
/// qoi_entry = -1 selects the QoI from the pilot variance.
MCResult run_mc(const Sampler& sampler, double epsilon, int level, int qoi_entry, double gamma,
                const MLMCOptions& options, int coarsest = 0);

/// The pilot phase of run_mc only: N, variance and normalized cost of the plain MC run that
/// would reach epsilon, without drawing the production samples (estimate is the pilot mean).
MCResult plan_mc(const Sampler& sampler, double epsilon, int level, int qoi_entry, double gamma,
                 const MLMCOptions& options, int coarsest = 0);

}  // namespace uq
