#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "uq/errors.hpp"
#include "uq/mesh.hpp"
#include "uq/random_field.hpp"
#include "uq/rng.hpp"

using namespace uq;

namespace {

// tan(w) = 2 l w / (l^2 w^2 - 1), multiplied through by cos(w) (l^2 w^2 - 1) / (l^2 w^2 + 1).
double scaled_equation(double l, double w) {
  return ((l * l * w * w - 1.0) * std::sin(w) - 2.0 * l * w * std::cos(w)) / (l * l * w * w + 1.0);
}

constexpr double kLambda = 0.3;
constexpr int kModes = 50;

}  // namespace

TEST_CASE("transcendental roots agree with bisection on the untransformed equation") {
  const auto roots = solve_transcendental_roots(kLambda, kModes);
  REQUIRE(roots.size() == kModes);
  for (int n = 1; n <= kModes; ++n) {
    const double w = roots[n - 1];
    CHECK(w > (n - 1) * std::numbers::pi);
    CHECK(w < n * std::numbers::pi);
    // The scaled equation has a spurious zero at w = 0 and changes sign once per bracket.
    const double lo = std::max((n - 1) * std::numbers::pi, 1e-9), hi = n * std::numbers::pi;
    const double ref = oracle::bisect([](double x) { return scaled_equation(kLambda, x); }, lo, hi);
    CHECK(w == doctest::Approx(ref).epsilon(1e-13));
    CHECK(std::abs(scaled_equation(kLambda, w)) < 1e-10);
    CHECK(std::abs(transcendental_residual(kLambda, w, n)) < 1e-12);
  }
}

TEST_CASE("eigenfunctions are orthonormal under quadrature") {
  const auto modes = kl_eigenpairs_1d(kLambda, kModes);
  for (int m = 0; m < kModes; ++m) {
    const double norm2 = oracle::integrate([&](double x) { return modes[m](x) * modes[m](x); }, 0.0, 1.0, 400);
    CHECK(std::abs(norm2 - 1.0) < 1e-8);
    const double w = modes[m].w;
    const double raw = oracle::integrate(
        [&](double x) { return std::pow(std::sin(w * x) + kLambda * w * std::cos(w * x), 2); }, 0.0, 1.0, 400);
    CHECK(kl_unnormalized_norm2(kLambda, w) == doctest::Approx(raw).epsilon(1e-11));
    for (int n = m + 1; n < kModes; ++n) {
      const double ip = oracle::integrate([&](double x) { return modes[m](x) * modes[n](x); }, 0.0, 1.0, 400);
      CHECK(std::abs(ip) < 1e-8);
    }
  }
}

TEST_CASE("eigenpairs satisfy the integral equation of the exponential kernel") {
  const auto modes = kl_eigenpairs_1d(kLambda, 8);
  for (const auto& mode : modes) {
    for (double x : {0.0, 0.17, 0.5, 0.93, 1.0}) {
      auto k = [&](double y) { return std::exp(-std::abs(x - y) / kLambda) * mode(y); };
      const double lhs = oracle::integrate(k, 0.0, x, 200) + oracle::integrate(k, x, 1.0, 200);
      CHECK(lhs == doctest::Approx(mode.theta * mode(x)).epsilon(1e-9));
    }
    CHECK(mode.theta == doctest::Approx(2 * kLambda / (kLambda * kLambda * mode.w * mode.w + 1)));
  }
}

TEST_CASE("1D eigenvalues sum to the kernel trace") {
  CHECK(kl_trace_1d(kLambda, 20000) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(kl_trace_1d(kLambda, 10) < kl_trace_1d(kLambda, 20));
}

TEST_CASE("2D truncation at 90% of the variance keeps about 101 terms") {
  const KLBasis basis = build_kl_basis_2d(CovarianceSpec{}, 0.9, 400);
  CHECK(basis.n_terms() >= 98);
  CHECK(basis.n_terms() <= 104);
  CHECK(basis.captured_fraction >= 0.9);
  CHECK(basis.total_trace == doctest::Approx(1.0));
  for (std::size_t k = 1; k < basis.n_terms(); ++k) CHECK(basis.terms[k].theta <= basis.terms[k - 1].theta);
  // Dropping the last term must fall below the target.
  double below = 0.0;
  for (std::size_t k = 0; k + 1 < basis.n_terms(); ++k) below += basis.terms[k].theta;
  CHECK(below / basis.total_trace < 0.9);
  CHECK_THROWS_AS(build_kl_basis_2d(CovarianceSpec{}, 0.9, 20), NumericError);

  std::ostringstream csv;
  write_basis_csv(basis, csv);
  CHECK(csv.str().rfind("n,i,j,theta", 0) == 0);
}

TEST_CASE("Gaussian field has the kernel covariance up to truncation") {
  const KLBasis basis = build_kl_basis_2d(CovarianceSpec{}, 0.95, 4000);
  Eigen::MatrixX2d pts(3, 2);
  pts << 0.3, 0.4, 0.45, 0.4, 0.3, 0.7;
  const int n = 4000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  for (int r = 0; r < n; ++r) {
    RandomStream rng(5, 9, 0, r);
    FieldSample s;
    s.xi.resize(static_cast<Eigen::Index>(basis.n_terms()));
    for (Eigen::Index k = 0; k < s.xi.size(); ++k) s.xi[k] = rng.normal();
    const Eigen::VectorXd z = evaluate_gaussian_field(basis, s, pts);
    acc += z * z.transpose();
  }
  acc /= n;
  auto kernel = [&](int a, int b) { return std::exp(-(pts.row(a) - pts.row(b)).cwiseAbs().sum() / 0.3); };
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) CHECK(acc(a, b) == doctest::Approx(kernel(a, b)).epsilon(0.1));
  }
}

TEST_CASE("memoryless transform maps onto the Gamma marginal") {
  const GammaParams g = concrete_preset();
  CHECK(transform_to_gamma(0.0, g) == doctest::Approx(gamma_inverse_cdf(0.5, g)).epsilon(1e-12));
  CHECK(transform_to_gamma(-1.0, g) < transform_to_gamma(1.0, g));
  CHECK(std::isfinite(transform_to_gamma(-40.0, g)));

  const MeshLevel m = build_mesh(BeamGeometry{}, 1);
  const KLBasis basis = build_kl_basis_2d(CovarianceSpec{}, 0.9, 400);
  FieldSample s;
  s.xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.n_terms()));
  const Eigen::VectorXd E = field_on_elements(basis, s, m, g);
  REQUIRE(E.size() == m.element_count());
  CHECK((E.array() - gamma_inverse_cdf(0.5, g)).abs().maxCoeff() < 1e-3);
}
