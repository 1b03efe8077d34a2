#include "uq/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uq/errors.hpp"
#include "uq/normal.hpp"

namespace uq {

double GammaParams::stddev() const { return std::sqrt(variance()); }

void GammaParams::validate() const {
  if (!(std::isfinite(alpha) && alpha > 0.0) || !(std::isfinite(beta) && beta > 0.0)) {
    throw DomainError("GammaParams: alpha and beta must be positive and finite");
  }
}

GammaParams concrete_preset() { return {7.1633, 4.1880e9, "concrete"}; }
GammaParams steel_preset() { return {934.2, 0.214e9, "steel"}; }

GammaParams material_preset(std::string_view name) {
  if (name == "concrete") return concrete_preset();
  if (name == "steel") return steel_preset();
  throw ConfigError("unknown material preset '" + std::string(name) + "' (expected concrete|steel)");
}

namespace {

constexpr int kMaxTerms = 100000;
constexpr double kEps = 1e-16;

// exp(a*ln(x) - x - lgamma(a)), the common prefactor of P and Q.
double incomplete_prefactor(double a, double x) {
  return std::exp(a * std::log(x) - x - std::lgamma(a));
}

double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) {
      return sum * incomplete_prefactor(a, x);
    }
  }
  throw NumericError("regularized_gamma_p: series did not converge");
}

// Upper tail Q(a, x) by the modified Lentz continued fraction.
double upper_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) {
      return h * incomplete_prefactor(a, x);
    }
  }
  throw NumericError("regularized_gamma_p: continued fraction did not converge");
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw DomainError("regularized_gamma_p: a must be positive");
  if (std::isnan(x) || x < 0.0) throw DomainError("regularized_gamma_p: x must be non-negative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return lower_series(a, x);
  return 1.0 - upper_continued_fraction(a, x);
}

double gamma_pdf(double x, const GammaParams& p) {
  p.validate();
  if (!std::isfinite(x) || x < 0.0) throw DomainError("gamma_pdf: x must be finite and non-negative");
  if (x == 0.0) {
    if (p.alpha > 1.0) return 0.0;
    if (p.alpha == 1.0) return 1.0 / p.beta;
    return std::numeric_limits<double>::infinity();
  }
  const double t = x / p.beta;
  return std::exp((p.alpha - 1.0) * std::log(t) - t - std::lgamma(p.alpha)) / p.beta;
}

double gamma_cdf(double x, const GammaParams& p) {
  p.validate();
  if (std::isnan(x) || x < 0.0) throw DomainError("gamma_cdf: x must be non-negative");
  return regularized_gamma_p(p.alpha, x / p.beta);
}

double gamma_inverse_cdf(double u, const GammaParams& p) {
  p.validate();
  if (!(u > 0.0 && u < 1.0)) throw DomainError("gamma_inverse_cdf: u must lie in (0, 1)");

  // Solve in the standardized variable t = x / beta.
  const double a = p.alpha;
  const auto cdf = [a](double t) { return regularized_gamma_p(a, t); };
  const auto pdf = [a](double t) {
    return std::exp((a - 1.0) * std::log(t) - t - std::lgamma(a));
  };

  // Wilson-Hilferty starting point.
  const double z = normal_quantile(u);
  const double k = 1.0 / (9.0 * a);
  double guess = a * std::pow(std::max(1.0 - k + z * std::sqrt(k), 1e-3), 3);
  guess = std::max(guess, std::numeric_limits<double>::min());

  double lo = guess;
  double hi = guess;
  int expansions = 0;
  while (cdf(lo) > u) {
    lo *= 0.5;
    if (++expansions > 2000 || lo == 0.0) throw NumericError("gamma_inverse_cdf: lower bracket failed");
  }
  expansions = 0;
  while (cdf(hi) < u) {
    hi = 2.0 * hi + 1.0;
    if (++expansions > 2000 || !std::isfinite(hi)) {
      throw NumericError("gamma_inverse_cdf: upper bracket failed");
    }
  }

  double t = std::clamp(guess, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double f = cdf(t) - u;
    if (f == 0.0) return t * p.beta;
    if (f < 0.0) lo = t; else hi = t;

    double next = t - f / pdf(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - t);
    t = next;
    if (step <= 1e-14 * t || hi - lo <= 1e-15 * t) return t * p.beta;
  }
  throw NumericError("gamma_inverse_cdf: root solve did not converge");
}

}  // namespace uq
