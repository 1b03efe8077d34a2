#pragma once

#include <string>
#include <string_view>

namespace uq {

/// Gamma distribution with shape `alpha` and scale `beta` (Pa).
struct GammaParams {
  double alpha = 1.0;
  double beta = 1.0;
  std::string label;

  double mean() const { return alpha * beta; }
  double variance() const { return alpha * beta * beta; }
  double stddev() const;

  /// Throws DomainError unless alpha > 0 and beta > 0 (both finite).
  void validate() const;
};

/// Concrete: alpha = 7.1633, beta = 4.1880e9 (mean 30 GPa).
GammaParams concrete_preset();
/// Steel: alpha = 934.2, beta = 0.214e9 (mean 200 GPa).
GammaParams steel_preset();
/// "concrete" or "steel"; anything else throws ConfigError.
GammaParams material_preset(std::string_view name);

/// Regularized lower incomplete gamma P(a, x). Series for x < a + 1, continued fraction otherwise.
double regularized_gamma_p(double a, double x);

double gamma_pdf(double x, const GammaParams& p);
double gamma_cdf(double x, const GammaParams& p);

/// Quantile: the x with gamma_cdf(x) == u, to 1e-10 relative or better.
/// Bracketed safeguarded Newton started from the Wilson-Hilferty approximation.
double gamma_inverse_cdf(double u, const GammaParams& p);

/// Homogeneous Young's modulus draw from one uniform variate.
inline double sample_homogeneous(const GammaParams& p, double u) { return gamma_inverse_cdf(u, p); }

}  // namespace uq
