#pragma once

namespace uq {

/// Standard normal CDF via erfc (accurate in both tails).
double normal_cdf(double z);

/// Standard normal quantile. Rational approximation followed by one Halley step on erfc,
/// which brings the relative error to roughly 1e-15.
double normal_quantile(double u);

}  // namespace uq
