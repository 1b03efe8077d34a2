#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "uq/errors.hpp"
#include "uq/mlmc.hpp"
#include "uq/rng.hpp"

using namespace uq;

namespace {

// P_l = mu + s z + k1 2^(-a l) + k2 2^(-b l / 2) u with one (z, u) per draw.
// Entries: [0.5 P, P, P^2]; the first two are QoI candidates.
struct Synthetic : Sampler {
  int levels = 6;
  double mu = 1.0, s = 1.0, k1 = 0.2, k2 = 0.3, a = 2.0, b = 3.0;
  bool decouple_level0 = false;  // level-0 partner of a coupled level-1 draw gets its own input
  double failure_rate = 0.0;

  int max_level() const override { return levels; }
  int response_size() const override { return 3; }
  int candidate_count() const override { return 2; }
  double work(int level) const override { return std::exp2(2.0 * level); }
  std::vector<int> report_entries() const override { return {0, 1}; }
  std::unique_ptr<Workspace> make_workspace() const override { return std::make_unique<Workspace>(); }

  double P(int l, double z, double u) const {
    return mu + s * z + k1 * std::exp2(-a * l) + k2 * std::exp2(-0.5 * b * l) * u;
  }
  Eigen::VectorXd vec(double p) const { return Eigen::Vector3d(0.5 * p, p, p * p); }

  void evaluate(int level, bool coupled, RandomStream& rng, Workspace&, SampleOutput& out) const override {
    if (failure_rate > 0.0 && rng.uniform() < failure_rate) throw SampleFailure("synthetic failure");
    const double z = rng.normal(), u = rng.normal();
    out.fine = vec(P(level, z, u));
    if (!coupled) {
      out.coarse.resize(0);
      return;
    }
    if (decouple_level0 && level == 1) {
      const double z2 = rng.normal(), u2 = rng.normal();
      out.coarse = vec(P(0, z2, u2));
    } else {
      out.coarse = vec(P(level - 1, z, u));
    }
  }
};

MLMCOptions quiet(std::uint64_t seed = 7) {
  MLMCOptions o;
  o.seed = seed;
  o.trial_samples = 100;
  o.max_level = 6;
  return o;
}

double cost_of(const std::vector<std::int64_t>& N, const std::vector<double>& C) {
  double c = 0.0;
  for (std::size_t l = 0; l < N.size(); ++l) c += static_cast<double>(N[l]) * C[l];
  return c;
}

// All integer minimizers of sum N C subject to sum V / N <= eps^2 / 2, N >= 1. For each choice of
// the leading levels the last one is set to its smallest feasible value.
std::vector<std::vector<std::int64_t>> brute_force(const std::vector<double>& V, const std::vector<double>& C,
                                                   double eps, std::int64_t bound) {
  const double budget = 0.5 * eps * eps;
  const std::size_t L = V.size();
  std::vector<std::vector<std::int64_t>> best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> N(L, 1);
  auto consider = [&] {
    double used = 0.0;
    for (std::size_t l = 0; l + 1 < L; ++l) used += V[l] / static_cast<double>(N[l]);
    const double left = budget - used;
    if (!(left > 0.0)) return;
    std::int64_t last = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(V[L - 1] / left)));
    while (V[L - 1] / static_cast<double>(last) > left) ++last;
    while (last > 1 && V[L - 1] / static_cast<double>(last - 1) <= left) --last;
    N[L - 1] = last;
    const double c = cost_of(N, C);
    if (c < best_cost * (1.0 - 1e-12)) {
      best_cost = c;
      best.assign(1, N);
    } else if (c <= best_cost * (1.0 + 1e-12)) {
      best.push_back(N);
    }
  };
  std::function<void(std::size_t)> rec = [&](std::size_t l) {
    if (l + 1 == L) {
      consider();
      return;
    }
    for (std::int64_t n = 1; n <= bound; ++n) {
      N[l] = n;
      rec(l + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("optimal_samples: hand example and invariances") {
  const auto N = optimal_samples({1.0, 0.25}, {1.0, 4.0}, std::sqrt(2.0));
  CHECK(N == std::vector<std::int64_t>{2, 1});

  // A single level is plain MC: N = ceil(2 V / eps^2).
  CHECK(optimal_samples({3.0}, {17.0}, 0.1)[0] == 600);

  const std::vector<double> V{2.0, 0.3, 0.05, 0.004};
  std::vector<double> C{1.0, 4.5, 17.0, 70.0};
  const auto base = optimal_samples(V, C, 0.01);
  for (auto& c : C) c *= 8.0;
  CHECK(optimal_samples(V, C, 0.01) == base);

  const auto zero = optimal_samples({1.0, 0.0}, {1.0, 4.0}, 0.1);
  CHECK(zero[1] == 0);

  CHECK_THROWS_AS(optimal_samples({1.0}, {1.0, 2.0}, 0.1), ContractError);
  CHECK_THROWS_AS(optimal_samples({1.0}, {0.0}, 0.1), DomainError);
  CHECK_THROWS_AS(optimal_samples({-1.0}, {1.0}, 0.1), DomainError);
  CHECK_THROWS_AS(optimal_samples({1.0}, {1.0}, 0.0), DomainError);
}

// The integer optimum may shift several samples between levels along a flat cost valley, so
// agreement is measured in cost: rounding up adds less than one sample per level to the
// continuous optimum, which never costs more than the integer one.
TEST_CASE("optimal_samples: feasible and within one sample per level of the integer optimum cost") {
  RandomStream rng(2024, 0, 0, 0);
  for (int inst = 0; inst < 20; ++inst) {
    const int L = 2 + inst % 2;
    std::vector<double> V(L), C(L);
    double v = 0.5 + rng.uniform(), c = 1.0;
    for (int l = 0; l < L; ++l) {
      V[l] = v;
      C[l] = c;
      v *= std::exp2(-(1.0 + 4.0 * rng.uniform()));
      c *= std::exp2(1.0 + 2.0 * rng.uniform());
    }
    // Puts the coarsest count between roughly 10 and 60.
    const double eps = std::sqrt(2.0 * V[0] / (10.0 + 50.0 * rng.uniform()));
    const auto N = optimal_samples(V, C, eps);

    double used = 0.0;
    for (int l = 0; l < L; ++l) used += V[l] / static_cast<double>(N[l]);
    CHECK(used <= 0.5 * eps * eps * (1.0 + 1e-12));

    const std::int64_t bound = *std::max_element(N.begin(), N.end()) + 40;
    const auto best = brute_force(V, C, eps, bound);
    REQUIRE_FALSE(best.empty());
    const double slack = std::accumulate(C.begin(), C.end(), 0.0);
    INFO("instance " << inst << " formula cost " << cost_of(N, C) << " optimum " << cost_of(best[0], C));
    CHECK(cost_of(N, C) >= cost_of(best[0], C) * (1.0 - 1e-12));
    CHECK(cost_of(N, C) < cost_of(best[0], C) + slack);
  }
}

TEST_CASE("bias test, screening and cost normalization") {
  // |m| / (2^alpha - 1) against eps / sqrt 2; here |m| / 3 = 1e-4.
  CHECK(bias_converged(3e-4, 2.0, 1.5e-4));
  CHECK_FALSE(bias_converged(3e-4, 2.0, 1.3e-4));
  CHECK(bias_converged(-3e-4, 2.0, 1.5e-4));
  CHECK(bias_converged(0.0, 1.0, 1e-9));
  CHECK_THROWS_AS(bias_converged(1.0, 0.0, 1.0), DomainError);

  CHECK(screen_coarsest(4.0, 1.0) == ScreenDecision::Drop);
  CHECK(screen_coarsest(std::exp2(2.3), 1.0) == ScreenDecision::Drop);
  CHECK(screen_coarsest(8.0, 1.0) == ScreenDecision::Keep);
  CHECK(screen_coarsest(1.0, 1.0) == ScreenDecision::Drop);
  CHECK(screen_coarsest(1.0, 0.0) == ScreenDecision::Keep);
  CHECK(screen_coarsest(0.0, 1.0) == ScreenDecision::Drop);

  CHECK(normalized_cost({100, 10}, 2.0) == doctest::Approx(140.0));
  CHECK(normalized_cost({0, 100, 10}, 2.0, 1) == doctest::Approx(140.0));
  CHECK(normalized_cost({5}, 3.0) == doctest::Approx(5.0));

  CHECK(minimum_samples(0) == 1);
  CHECK(minimum_samples(2) == 1);
  CHECK(minimum_samples(3) == 3);
}

TEST_CASE("QoI selection") {
  Eigen::VectorXd v(4), m(4);
  v << 1.0, 3.0, 3.0, 9.0;
  m << 0.0, 0.0, 0.0, 0.0;
  CHECK(select_qoi_node(v, m, 4) == 3);
  CHECK(select_qoi_node(v, m, 3) == 1);  // tie: lowest index
  v.setZero();
  m << 0.5, -2.0, 2.0, 1.0;
  CHECK(select_qoi_node(v, m, 4) == 1);
  CHECK_THROWS_AS(select_qoi_node(v, m, 0), ContractError);
  CHECK_THROWS_AS(select_qoi_node(v, m, 5), ContractError);
}

TEST_CASE("rate regression on exact data") {
  CHECK(regression_slope({0, 1, 2}, {1, 3, 5}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(regression_slope({1}, {1}), ContractError);

  std::vector<double> m, v, c;
  for (int l = 0; l < 5; ++l) {
    m.push_back((l % 2 ? -1.0 : 1.0) * 0.7 * std::exp2(-1.9 * l));
    v.push_back(0.3 * std::exp2(-3.0 * l));
    c.push_back(1e-3 * std::exp2(2.0 * l));
  }
  // Level 0 is excluded from the fit: corrupting it changes nothing.
  m[0] = 123.0;
  v[0] = 1e-9;
  const RateEstimates r = estimate_rates(m, v, c);
  CHECK(r.alpha == doctest::Approx(1.9));
  CHECK(r.beta == doctest::Approx(3.0));
  CHECK(r.gamma == doctest::Approx(2.0));
  CHECK(r.alpha_fitted);
  CHECK_FALSE(r.theorem_warning);

  RateEstimates priors;
  priors.alpha = 1.5;
  const RateEstimates p = estimate_rates({1.0, 0.5}, {1.0, 0.1}, {1.0, 4.0}, priors);
  CHECK_FALSE(p.alpha_fitted);
  CHECK(p.alpha == 1.5);
  CHECK(p.gamma == 2.0);

  const RateEstimates w = estimate_rates({1, 0.5, 0.25}, {1, 0.1, 0.01}, {1, 16, 256});
  CHECK(w.alpha == doctest::Approx(1.0));
  CHECK(w.theorem_warning);
}

TEST_CASE("moment accumulator merge matches a single pass") {
  RandomStream rng(5, 0, 0, 0);
  MomentAccumulator all, a, b;
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd x(2);
    x << rng.normal(), 3.0 + 2.0 * rng.normal();
    all.add(x);
    (i < 170 ? a : b).add(x);
  }
  a.merge(b);
  CHECK(a.n == 500);
  CHECK(a.mean[1] == doctest::Approx(all.mean[1]).epsilon(1e-13));
  CHECK(a.variance(1) == doctest::Approx(all.variance(1)).epsilon(1e-12));
  MomentAccumulator empty;
  empty.merge(all);
  CHECK(empty.mean == all.mean);
  MomentAccumulator one;
  one.add(Eigen::VectorXd::Ones(2));
  CHECK(one.variance(0) == 0.0);
}

TEST_CASE("MLMC on a synthetic hierarchy") {
  Synthetic s;
  const double eps = 1e-2;
  const MLMCResult r = run_mlmc(s, eps, quiet());

  CHECK(r.converged);
  CHECK(r.qoi_entry == 1);
  CHECK(r.coarsest_level == 0);
  CHECK(r.finest_level >= 2);
  CHECK(r.finest_level <= 4);

  SUBCASE("telescoping sum of the table") {
    double sum = 0.0;
    for (const auto& row : r.levels) sum += row.mean_y;
    CHECK(sum == r.estimate);
    CHECK(r.mean[1] == doctest::Approx(r.estimate).epsilon(1e-12));
    CHECK(r.mean[0] == doctest::Approx(0.5 * r.estimate).epsilon(1e-12));
  }
  SUBCASE("allocation meets the variance budget") {
    CHECK(r.variance_sum <= 0.5 * eps * eps * (1.0 + 1e-12));
    for (std::size_t k = 0; k + 1 < r.levels.size(); ++k) CHECK(r.levels[k].N > r.levels[k + 1].N);
  }
  SUBCASE("estimate within the target error") {
    CHECK(std::abs(r.estimate - s.mu) < 4.0 * eps);
    CHECK(r.stddev[1] == doctest::Approx(std::sqrt(s.s * s.s + s.k2 * s.k2 * std::exp2(-s.b * r.finest_level)))
                             .epsilon(0.1));
  }
  SUBCASE("fitted rates") {
    CHECK(r.rates.beta == doctest::Approx(3.0).epsilon(0.15));
    CHECK(r.rates.beta_fitted);
  }
  SUBCASE("quantile samples come from the coarsest level") {
    REQUIRE(r.quantile_entries == std::vector<int>{0, 1});
    const auto drawn = static_cast<std::size_t>(r.levels[0].N + r.levels[0].N_trial);
    CHECK(r.quantile_samples[1].size() == std::min<std::size_t>(drawn, quiet().quantile_cap));
  }
}

TEST_CASE("MLMC is bit-identical across worker counts") {
  Synthetic s;
  std::vector<MLMCResult> runs;
  for (int w : {1, 4, 12}) {
    MLMCOptions o = quiet(99);
    o.workers = w;
    runs.push_back(run_mlmc(s, 2e-2, o));
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    CHECK(runs[i].estimate == runs[0].estimate);
    REQUIRE(runs[i].levels.size() == runs[0].levels.size());
    for (std::size_t k = 0; k < runs[0].levels.size(); ++k) {
      CHECK(runs[i].levels[k].N == runs[0].levels[k].N);
      CHECK(runs[i].levels[k].mean_y == runs[0].levels[k].mean_y);
      CHECK(runs[i].levels[k].var_y == runs[0].levels[k].var_y);
    }
    CHECK(runs[i].quantile_samples == runs[0].quantile_samples);
  }
  MLMCOptions other = quiet(100);
  CHECK(run_mlmc(s, 2e-2, other).estimate != runs[0].estimate);
}

TEST_CASE("zero variance terminates at the sample floors") {
  Synthetic s;
  s.s = 0.0;
  s.k2 = 0.0;
  const MLMCResult r = run_mlmc(s, 1e-3, quiet());
  CHECK(r.converged);
  for (const auto& row : r.levels) {
    CHECK(row.N == minimum_samples(row.level));
    CHECK(row.var_y == 0.0);
  }
  CHECK(r.estimate == doctest::Approx(s.P(r.finest_level, 0.0, 0.0)).epsilon(1e-14));
  CHECK(std::abs(r.estimate - s.mu) <= 1e-3);
  CHECK(r.rates.alpha == doctest::Approx(2.0));
}

TEST_CASE("screening drops a decoupled coarsest level") {
  Synthetic s;
  s.decouple_level0 = true;
  MLMCOptions o = quiet();
  o.screening = true;
  const MLMCResult r = run_mlmc(s, 2e-2, o);
  CHECK(r.coarsest_dropped);
  CHECK(r.coarsest_level == 1);
  CHECK(r.screening_log_ratio < 0.0);
  CHECK(r.levels.front().level == 1);
  CHECK(std::abs(r.estimate - s.mu) < 4.0 * 2e-2);

  // The well-coupled hierarchy keeps level 0.
  Synthetic good;
  const MLMCResult k = run_mlmc(good, 2e-2, o);
  CHECK_FALSE(k.coarsest_dropped);
  CHECK(k.screening_log_ratio > kScreeningThreshold);

  // Without screening the decoupled level stays and carries the large variance.
  const MLMCResult n = run_mlmc(s, 2e-2, quiet());
  CHECK(n.coarsest_level == 0);
  REQUIRE(n.levels.size() >= 2);
  CHECK(n.levels[1].var_y > n.levels[1].var_p);
}

TEST_CASE("non-convergence at the level cap is reported") {
  Synthetic s;
  s.k1 = 50.0;
  MLMCOptions o = quiet();
  o.max_level = 2;
  const MLMCResult r = run_mlmc(s, 1e-2, o);
  CHECK_FALSE(r.converged);
  CHECK(r.finest_level == 2);
}

TEST_CASE("sample failures are redrawn, excessive failures abort") {
  Synthetic s;
  s.failure_rate = 0.002;
  const MLMCResult r = run_mlmc(s, 5e-2, quiet());
  CHECK(r.sample_failures > 0);
  CHECK(std::abs(r.estimate - s.mu) < 0.2);

  s.failure_rate = 0.2;
  CHECK_THROWS_AS(run_mlmc(s, 5e-2, quiet()), NumericError);
}

TEST_CASE("argument validation") {
  Synthetic s;
  CHECK_THROWS_AS(run_mlmc(s, 0.0, quiet()), DomainError);
  MLMCOptions o = quiet();
  o.trial_samples = 1;
  CHECK_THROWS_AS(run_mlmc(s, 0.1, o), ConfigError);
  o = quiet();
  o.qoi_entry = 3;
  CHECK_THROWS_AS(run_mlmc(s, 0.1, o), ConfigError);
  o = quiet();
  o.max_level = 0;
  CHECK_THROWS_AS(run_mlmc(s, 0.1, o), ConfigError);
  CHECK_THROWS_AS(run_mc(s, 0.1, 7, 1, 2.0, quiet()), ConfigError);
  CHECK_THROWS_AS(run_mc(s, 0.1, 0, -2, 2.0, quiet()), ConfigError);
}

TEST_CASE("plain Monte Carlo") {
  Synthetic s;
  const double eps = 2e-2;
  const MCResult mc = run_mc(s, eps, 2, -1, 2.0, quiet());
  const MCResult plan = plan_mc(s, eps, 2, -1, 2.0, quiet());
  CHECK(mc.qoi_entry == 1);
  CHECK(mc.N == static_cast<std::int64_t>(std::ceil(2.0 * plan.variance / (eps * eps))));
  CHECK(mc.normalized_cost == doctest::Approx(static_cast<double>(mc.N + mc.N_pilot) * 16.0));
  CHECK(std::abs(mc.estimate - s.P(2, 0.0, 0.0)) < 4.0 * eps);
  CHECK(mc.quantile_samples.size() == mc.quantile_entries.size());

  CHECK(plan.N == mc.N);
  CHECK(plan.estimate != mc.estimate);
  CHECK(plan.normalized_cost == mc.normalized_cost);

  MLMCOptions o = quiet();
  o.workers = 4;
  CHECK(run_mc(s, eps, 2, -1, 2.0, o).estimate == mc.estimate);

  Synthetic flat;
  flat.s = 0.0;
  flat.k2 = 0.0;
  const MCResult z = run_mc(flat, eps, 1, 1, 2.0, quiet());
  CHECK(z.N == 1);
  CHECK(z.estimate == flat.P(1, 0.0, 0.0));
}
