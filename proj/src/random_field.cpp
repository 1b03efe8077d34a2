#include "uq/random_field.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "uq/csv.hpp"
#include "uq/errors.hpp"
#include "uq/normal.hpp"

namespace uq {

void CovarianceSpec::validate() const {
  if (!(sigma > 0.0) || !(lambda > 0.0)) {
    throw DomainError("CovarianceSpec: sigma and lambda must be positive");
  }
  if (p_norm != 1) throw DomainError("CovarianceSpec: only the 1-norm kernel has analytic eigenpairs");
}

double transcendental_residual(double lambda, double w, int n) {
  const double lw = lambda * w;
  const double s = std::sin(0.5 * w);
  const double c = std::cos(0.5 * w);
  const double g = (n % 2 == 1) ? lw * s - c : s + lw * c;
  return g / std::sqrt(1.0 + lw * lw);
}

std::vector<double> solve_transcendental_roots(double lambda, int count) {
  if (!(lambda > 0.0)) throw DomainError("solve_transcendental_roots: lambda must be positive");
  if (count < 1) throw DomainError("solve_transcendental_roots: count must be at least 1");

  std::vector<double> roots;
  roots.reserve(count);
  for (int n = 1; n <= count; ++n) {
    double lo = (n - 1) * std::numbers::pi;
    double hi = n * std::numbers::pi;
    double f_lo = transcendental_residual(lambda, lo, n);
    double f_hi = transcendental_residual(lambda, hi, n);
    if (f_lo * f_hi > 0.0) {
      std::ostringstream msg;
      msg << "solve_transcendental_roots: no sign change on [" << lo << ", " << hi << "]";
      throw NumericError(msg.str());
    }
    // Bisection down to adjacent doubles.
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double f_mid = transcendental_residual(lambda, mid, n);
      if (f_mid == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((f_mid < 0.0) == (f_lo < 0.0)) {
        lo = mid;
        f_lo = f_mid;
      } else {
        hi = mid;
      }
    }
    const double r_lo = std::abs(transcendental_residual(lambda, lo, n));
    const double r_hi = std::abs(transcendental_residual(lambda, hi, n));
    roots.push_back(r_lo <= r_hi ? lo : hi);
  }
  return roots;
}

double kl_unnormalized_norm2(double lambda, double w) {
  const double lw = lambda * w;
  const double s = std::sin(w);
  return 0.5 * (1.0 + lw * lw) + (lw * lw - 1.0) * std::sin(2.0 * w) / (4.0 * w) + lambda * s * s;
}

double EigenPair1D::operator()(double x) const {
  return amplitude * (std::sin(w * x) + lambda_w * std::cos(w * x));
}

std::vector<EigenPair1D> kl_eigenpairs_1d(double lambda, int count) {
  const auto roots = solve_transcendental_roots(lambda, count);
  std::vector<EigenPair1D> pairs;
  pairs.reserve(count);
  for (double w : roots) {
    EigenPair1D p;
    p.w = w;
    p.lambda_w = lambda * w;
    p.theta = 2.0 * lambda / (lambda * lambda * w * w + 1.0);
    p.amplitude = 1.0 / std::sqrt(kl_unnormalized_norm2(lambda, w));
    pairs.push_back(p);
  }
  return pairs;
}

double kl_trace_1d(double lambda, int budget) {
  double sum = 0.0;
  for (const auto& p : kl_eigenpairs_1d(lambda, budget)) sum += p.theta;
  return sum;
}

KLBasis build_kl_basis_2d(const CovarianceSpec& spec, double target_fraction, int max_terms,
                          int index_budget) {
  spec.validate();
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw DomainError("build_kl_basis_2d: target_fraction must lie in (0, 1)");
  }
  if (max_terms < 1 || index_budget < 1) throw DomainError("build_kl_basis_2d: empty budget");

  const auto modes = kl_eigenpairs_1d(spec.lambda, index_budget);
  const double var = spec.sigma * spec.sigma;

  std::vector<KLTerm> candidates;
  candidates.reserve(static_cast<std::size_t>(index_budget) * index_budget);
  for (int i = 1; i <= index_budget; ++i) {
    for (int j = 1; j <= index_budget; ++j) {
      candidates.push_back({var * modes[i - 1].theta * modes[j - 1].theta, i, j});
    }
  }
  // Ties (i, j) / (j, i) are ordered by index so the result is deterministic.
  std::sort(candidates.begin(), candidates.end(), [](const KLTerm& a, const KLTerm& b) {
    if (a.theta != b.theta) return a.theta > b.theta;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  KLBasis basis;
  basis.spec = spec;
  basis.total_trace = var;
  double cumulative = 0.0;
  for (const auto& t : candidates) {
    if (static_cast<int>(basis.terms.size()) >= max_terms) break;
    basis.terms.push_back(t);
    cumulative += t.theta;
    if (cumulative / basis.total_trace >= target_fraction) break;
  }
  basis.captured_fraction = cumulative / basis.total_trace;
  if (basis.captured_fraction < target_fraction) {
    std::ostringstream msg;
    msg << "build_kl_basis_2d: " << max_terms << " terms capture only " << basis.captured_fraction
        << " of the variance (target " << target_fraction << ")";
    throw NumericError(msg.str());
  }

  int max_index = 0;
  for (const auto& t : basis.terms) max_index = std::max({max_index, t.i, t.j});
  basis.modes.assign(modes.begin(), modes.begin() + max_index);
  return basis;
}

namespace {

void check_sample(const KLBasis& basis, const FieldSample& sample) {
  if (static_cast<std::size_t>(sample.xi.size()) != basis.n_terms()) {
    throw ContractError("field sample length does not match the KL basis");
  }
}

// Coefficient matrix C(i - 1, j - 1) = sqrt(theta_n) xi_n, so that Z(x, y) = bx(x)^T C by(y).
Eigen::MatrixXd coefficient_matrix(const KLBasis& basis, const FieldSample& sample) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis.max_mode(), basis.max_mode());
  for (std::size_t n = 0; n < basis.n_terms(); ++n) {
    const auto& t = basis.terms[n];
    c(t.i - 1, t.j - 1) += std::sqrt(t.theta) * sample.xi[static_cast<Eigen::Index>(n)];
  }
  return c;
}

// Row k holds mode k + 1 evaluated at each coordinate.
Eigen::MatrixXd mode_table(const KLBasis& basis, const Eigen::VectorXd& coords) {
  Eigen::MatrixXd t(basis.max_mode(), coords.size());
  for (int k = 0; k < basis.max_mode(); ++k) {
    for (Eigen::Index p = 0; p < coords.size(); ++p) t(k, p) = basis.modes[k](coords[p]);
  }
  return t;
}

std::atomic<std::uint64_t> g_clamp_count{0};

}  // namespace

Eigen::VectorXd evaluate_gaussian_field(const KLBasis& basis, const FieldSample& sample,
                                        const Eigen::Ref<const Eigen::MatrixX2d>& points) {
  check_sample(basis, sample);
  const Eigen::MatrixXd c = coefficient_matrix(basis, sample);
  const Eigen::MatrixXd bx = mode_table(basis, points.col(0));
  const Eigen::MatrixXd by = mode_table(basis, points.col(1));
  // Z_p = bx_p^T C by_p for every point p.
  return ((c.transpose() * bx).array() * by.array()).colwise().sum().transpose();
}

double transform_to_gamma(double z, const GammaParams& target) {
  if (!std::isfinite(z)) throw DomainError("transform_to_gamma: z must be finite");
  constexpr double kClamp = 1e-16;
  double u = normal_cdf(z);
  if (u < kClamp || u > 1.0 - kClamp) {
    u = std::clamp(u, kClamp, 1.0 - kClamp);
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
  }
  return gamma_inverse_cdf(u, target);
}

std::uint64_t transform_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

Eigen::VectorXd field_on_elements(const KLBasis& basis, const FieldSample& sample,
                                  const MeshLevel& mesh, const GammaParams& target) {
  check_sample(basis, sample);
  // Midpoints form a tensor grid, so the field is Bx^T C By on that grid.
  Eigen::VectorXd xs(mesh.nx), ys(mesh.ny);
  for (int ex = 0; ex < mesh.nx; ++ex) xs[ex] = (ex + 0.5) / mesh.nx;
  for (int ey = 0; ey < mesh.ny; ++ey) ys[ey] = (ey + 0.5) / mesh.ny;

  const Eigen::MatrixXd z =
      mode_table(basis, xs).transpose() * coefficient_matrix(basis, sample) * mode_table(basis, ys);

  Eigen::VectorXd e(mesh.element_count());
  for (int ey = 0; ey < mesh.ny; ++ey) {
    for (int ex = 0; ex < mesh.nx; ++ex) e[ey * mesh.nx + ex] = transform_to_gamma(z(ex, ey), target);
  }
  return e;
}

void write_basis_csv(const KLBasis& basis, std::ostream& out) {
  out << "n,i,j,theta,w_i,w_j,A_i,A_j\n";
  for (std::size_t n = 0; n < basis.n_terms(); ++n) {
    const auto& t = basis.terms[n];
    const auto& mi = basis.modes[t.i - 1];
    const auto& mj = basis.modes[t.j - 1];
    out << n + 1 << ',' << t.i << ',' << t.j << ',' << format_double(t.theta) << ','
        << format_double(mi.w) << ',' << format_double(mj.w) << ',' << format_double(mi.amplitude)
        << ',' << format_double(mj.amplitude) << '\n';
  }
}

}  // namespace uq
