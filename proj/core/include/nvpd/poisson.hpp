#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

// Poisson pmf/cdf helpers shared by the HMM and mixture fitters.

namespace nvpd {

inline double poisson_log_pmf(std::uint32_t k, double mean) {
  if (mean <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return k * std::log(mean) - mean - std::lgamma(static_cast<double>(k) + 1.0);
}

inline double poisson_pmf(std::uint32_t k, double mean) {
  return std::exp(poisson_log_pmf(k, mean));
}

// P(X <= k). Direct summation; fine for the count ranges in this project.
inline double poisson_cdf(std::int64_t k, double mean) {
  if (k < 0) return 0.0;
  if (mean <= 0.0) return 1.0;
  double sum = 0.0;
  for (std::int64_t i = 0; i <= k; ++i)
    sum += poisson_pmf(static_cast<std::uint32_t>(i), mean);
  return sum < 1.0 ? sum : 1.0;
}

}  // namespace nvpd
