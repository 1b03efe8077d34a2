#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "uq/errors.hpp"
#include "uq/normal.hpp"
#include "uq/rng.hpp"

using namespace uq;

TEST_CASE("normal CDF against erfc") {
  for (double z : {-8.0, -3.0, -1.0, 0.0, 0.5, 2.0, 6.0}) {
    CHECK(normal_cdf(z) == doctest::Approx(0.5 * std::erfc(-z / std::sqrt(2.0))).epsilon(1e-15));
  }
}

TEST_CASE("normal quantile matches bisection on the CDF") {
  for (double u : {1e-15, 1e-8, 1e-3, 0.02425, 0.1, 0.5, 0.8, 0.97575, 0.999, 1 - 1e-10}) {
    // Upper half through the complementary tail, which is well conditioned.
    const double ref = u <= 0.5 ? oracle::bisect([&](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)) - u; }, -40.0, 40.0)
                                : oracle::bisect([&](double z) { return (1.0 - u) - 0.5 * std::erfc(z / std::sqrt(2.0)); }, -40.0, 40.0);
    CHECK(normal_quantile(u) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(normal_quantile(1.0) > 0.0);
  CHECK_THROWS_AS(normal_quantile(1.5), DomainError);
  CHECK_THROWS_AS(normal_quantile(std::nan("")), DomainError);
}

TEST_CASE("random streams are counter based and decorrelated") {
  RandomStream a(1, 2, 3, 4), b(1, 2, 3, 4), c(1, 2, 3, 5);
  for (int i = 0; i < 10; ++i) {
    const double ua = a.uniform();
    CHECK(ua == b.uniform());
    CHECK(ua != c.uniform());
    CHECK(ua > 0.0);
    CHECK(ua < 1.0);
  }
  CHECK(RandomStream(1, 2, 3, 4, 1).key() != RandomStream(1, 2, 3, 4, 0).key());

  double s = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int r = 0; r < n; ++r) {
    RandomStream g(11, 0, 0, r);
    const double z = g.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1.0) < 6.0 * std::sqrt(2.0 / n));
}
