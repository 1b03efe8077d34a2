#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "uq/gamma.hpp"
#include "uq/mesh.hpp"

namespace uq {

/// Exponential covariance sigma^2 exp(-||x - y||_1 / lambda) on the unit square.
struct CovarianceSpec {
  double sigma = 1.0;
  double lambda = 0.3;
  int p_norm = 1;

  void validate() const;
};

/// Bracketed form of tan(w) = 2 lambda w / (lambda^2 w^2 - 1) used for root finding.
///
/// With t = tan(w / 2) the equation factors into (lambda w t - 1)(t + lambda w) = 0, so
/// odd-numbered roots solve lambda w sin(w/2) - cos(w/2) = 0 and even-numbered roots
/// sin(w/2) + lambda w cos(w/2) = 0. Both are divided by sqrt(1 + lambda^2 w^2) so that the
/// residual has unit scale. Root n is the unique zero inside ((n - 1) pi, n pi).
double transcendental_residual(double lambda, double w, int n);

/// Roots w_1 < w_2 < ... < w_count of the transcendental equation, one per bracket.
std::vector<double> solve_transcendental_roots(double lambda, int count);

/// One-dimensional eigenpair of the unit-variance exponential kernel on [0, 1].
struct EigenPair1D {
  double theta = 0.0;
  double w = 0.0;
  double lambda_w = 0.0;
  double amplitude = 0.0;  // normalizes the eigenfunction to unit L2 norm

  double operator()(double x) const;
};

/// theta_n = 2 lambda / (lambda^2 w_n^2 + 1) and b_n(x) = A_n (sin(w_n x) + lambda w_n cos(w_n x)).
std::vector<EigenPair1D> kl_eigenpairs_1d(double lambda, int count);

/// Closed-form squared norm of sin(w x) + lambda w cos(w x) over [0, 1].
double kl_unnormalized_norm2(double lambda, double w);

/// Sum of the first `budget` 1D eigenvalues; tends to 1 (the 1D trace) as budget grows.
double kl_trace_1d(double lambda, int budget);

struct KLTerm {
  double theta = 0.0;  // includes sigma^2
  int i = 0;           // 1-based index along x
  int j = 0;           // 1-based index along y
};

/// Truncated tensor-product KL basis, terms sorted by non-increasing eigenvalue.
struct KLBasis {
  CovarianceSpec spec;
  std::vector<KLTerm> terms;
  /// 1D eigenpairs shared by both axes, index k holds mode k + 1.
  std::vector<EigenPair1D> modes;
  double captured_fraction = 0.0;
  double total_trace = 0.0;

  std::size_t n_terms() const { return terms.size(); }
  int max_mode() const { return static_cast<int>(modes.size()); }
};

/// Default 1D index budget per axis for enumerating tensor-product candidates.
inline constexpr int kTensorIndexBudget = 150;

/// Smallest prefix of the sorted tensor eigenvalues reaching target_fraction of the trace.
/// The trace of the separable kernel on the unit square is sigma^2.
/// Throws NumericError naming the achieved fraction when max_terms is not enough.
KLBasis build_kl_basis_2d(const CovarianceSpec& spec, double target_fraction, int max_terms,
                          int index_budget = kTensorIndexBudget);

/// Standard-normal coefficients of one field realization.
struct FieldSample {
  Eigen::VectorXd xi;
  std::uint64_t seed_id = 0;
};

/// Z(x) = sum_n sqrt(theta_n) xi_n b_n(x) at points of the unit square (one per row).
Eigen::VectorXd evaluate_gaussian_field(const KLBasis& basis, const FieldSample& sample,
                                        const Eigen::Ref<const Eigen::MatrixX2d>& points);

/// Memoryless transform g(z) = F^{-1}(Phi(z)) onto the Gamma marginal.
/// Phi(z) is clamped into [1e-16, 1 - 1e-16]; see transform_clamp_count().
double transform_to_gamma(double z, const GammaParams& target);

/// Number of times transform_to_gamma had to clamp Phi(z) since process start.
std::uint64_t transform_clamp_count();

/// Young's modulus per element: Gaussian field at the element midpoint, with physical
/// coordinates normalized by beam length and height, mapped onto the Gamma marginal.
Eigen::VectorXd field_on_elements(const KLBasis& basis, const FieldSample& sample,
                                  const MeshLevel& mesh, const GammaParams& target);

/// CSV table with header n,i,j,theta,w_i,w_j,A_i,A_j.
void write_basis_csv(const KLBasis& basis, std::ostream& out);

}  // namespace uq
