#include "nvpd/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvpd/nls.hpp"
#include "nvpd/poisson.hpp"

namespace nvpd {

namespace {

struct Moments {
  double total = 0.0;
  double mean = 0.0;
};

Moments histogram_moments(const std::vector<std::uint64_t>& hist) {
  Moments m;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    m.total += static_cast<double>(hist[k]);
    m.mean += static_cast<double>(hist[k]) * static_cast<double>(k);
  }
  if (m.total > 0.0) m.mean /= m.total;
  return m;
}

// Weighted 2-means on the count axis, used to seed EM.
void two_means_seed(const std::vector<std::uint64_t>& hist, double& mu_lo,
                    double& mu_hi, double& frac_lo) {
  std::size_t k_min = hist.size(), k_max = 0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    if (hist[k] == 0) continue;
    k_min = std::min(k_min, k);
    k_max = std::max(k_max, k);
  }
  double c_lo = static_cast<double>(k_min);
  double c_hi = static_cast<double>(k_max);
  for (int iter = 0; iter < 100; ++iter) {
    double sum_lo = 0.0, n_lo = 0.0, sum_hi = 0.0, n_hi = 0.0;
    for (std::size_t k = 0; k < hist.size(); ++k) {
      if (hist[k] == 0) continue;
      const double kk = static_cast<double>(k);
      const double w = static_cast<double>(hist[k]);
      if (std::fabs(kk - c_lo) <= std::fabs(kk - c_hi)) {
        sum_lo += w * kk;
        n_lo += w;
      } else {
        sum_hi += w * kk;
        n_hi += w;
      }
    }
    const double new_lo = n_lo > 0.0 ? sum_lo / n_lo : c_lo;
    const double new_hi = n_hi > 0.0 ? sum_hi / n_hi : c_hi;
    const bool stable = std::fabs(new_lo - c_lo) < 1e-12 &&
                        std::fabs(new_hi - c_hi) < 1e-12;
    c_lo = new_lo;
    c_hi = new_hi;
    frac_lo = (n_lo + n_hi) > 0.0 ? n_lo / (n_lo + n_hi) : 0.5;
    if (stable) break;
  }
  mu_lo = c_lo;
  mu_hi = c_hi;
}

}  // namespace

PoissonMixture fit_poisson_mixture(const std::vector<std::uint64_t>& hist,
                                   const MixtureOptions& options) {
  const Moments mom = histogram_moments(hist);
  if (mom.total < 100.0)
    throw std::domain_error("histogram must contain at least 100 shots");

  double mu_lo = 0.0, mu_hi = 0.0, frac_lo = 0.5;
  two_means_seed(hist, mu_lo, mu_hi, frac_lo);
  if (mu_hi <= mu_lo) mu_hi = mu_lo + 1.0;
  frac_lo = std::clamp(frac_lo, 1e-3, 1.0 - 1e-3);

  double mu0 = std::max(mu_lo, 1e-6);
  double mu1 = std::max(mu_hi, mu0 + 1e-6);
  double pi0 = frac_lo;

  PoissonMixture out;
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    out.iterations = iter + 1;
    double ll = 0.0;
    double n0 = 0.0, n1 = 0.0, s0 = 0.0, s1 = 0.0;
    for (std::size_t k = 0; k < hist.size(); ++k) {
      if (hist[k] == 0) continue;
      const double w = static_cast<double>(hist[k]);
      const double kk = static_cast<double>(k);
      const double l0 =
          std::log(pi0) + poisson_log_pmf(static_cast<std::uint32_t>(k), mu0);
      const double l1 = std::log(1.0 - pi0) +
                        poisson_log_pmf(static_cast<std::uint32_t>(k), mu1);
      const double lmax = std::max(l0, l1);
      const double denom = std::exp(l0 - lmax) + std::exp(l1 - lmax);
      ll += w * (lmax + std::log(denom));
      const double r0 = std::exp(l0 - lmax) / denom;
      n0 += w * r0;
      n1 += w * (1.0 - r0);
      s0 += w * r0 * kk;
      s1 += w * (1.0 - r0) * kk;
    }
    if (ll < prev_ll - 1e-8 * (1.0 + std::fabs(prev_ll)))
      throw std::logic_error("EM log-likelihood decreased");
    const bool done = std::fabs(ll - prev_ll) <=
                      options.rel_ll_tol * (1.0 + std::fabs(ll));
    prev_ll = ll;
    out.log_likelihood = ll;
    if (done) {
      out.converged = true;
      break;
    }
    mu0 = n0 > 0.0 ? std::max(s0 / n0, 1e-9) : mu0;
    mu1 = n1 > 0.0 ? std::max(s1 / n1, 1e-9) : mu1;
    pi0 = std::clamp(n0 / mom.total, 1e-12, 1.0 - 1e-12);
  }

  if (mu0 > mu1) {
    std::swap(mu0, mu1);
    pi0 = 1.0 - pi0;
  }
  out.mu_zero = mu0;
  out.mu_minus = mu1;
  out.amp_zero = pi0 * mom.total;
  out.amp_minus = (1.0 - pi0) * mom.total;
  const double min_amp = std::min(out.amp_zero, out.amp_minus);
  out.resolved = (mu1 - mu0 >= 1.0) && (min_amp >= 1e-3 * mom.total);
  return out;
}

double population_from_mixture(const PoissonMixture& m) {
  const double total = m.amp_minus + m.amp_zero;
  if (!(total > 0.0)) throw std::domain_error("mixture amplitudes sum to zero");
  return m.amp_minus / total;
}

double classifier_error_probability(const PoissonMixture& m,
                                    std::int64_t threshold) {
  const double total = m.amp_minus + m.amp_zero;
  const double pi_minus = m.amp_minus / total;
  const double pi_zero = m.amp_zero / total;
  // Counts <= threshold classify as Neutral.
  return pi_minus * poisson_cdf(threshold, m.mu_minus) +
         pi_zero * (1.0 - poisson_cdf(threshold, m.mu_zero));
}

ThresholdClassifier make_threshold_classifier(const PoissonMixture& m) {
  if (!m.resolved)
    throw FitError("cannot build a classifier from an unresolved mixture");

  const double total = m.amp_minus + m.amp_zero;
  const double pi_minus = m.amp_minus / total;
  const double pi_zero = m.amp_zero / total;

  // The weighted pmfs cross where pi_m Pois(k|mu_m) = pi_0 Pois(k|mu_0):
  // k_c = (mu_m - mu_0 + ln(pi_0/pi_m)) / ln(mu_m/mu_0). Counts above k_c
  // favor the bright component, so the optimal integer threshold is near
  // floor(k_c); check its neighbours to settle rounding.
  const double k_c = (m.mu_minus - m.mu_zero + std::log(pi_zero / pi_minus)) /
                     std::log(m.mu_minus / m.mu_zero);
  const auto base = static_cast<std::int64_t>(std::floor(k_c));
  const std::int64_t lo = std::max<std::int64_t>(-1, base - 1);
  const std::int64_t hi = std::max<std::int64_t>(-1, base + 1);
  std::int64_t best = lo;
  double best_err = classifier_error_probability(m, lo);
  for (std::int64_t cand = lo + 1; cand <= hi; ++cand) {
    const double err = classifier_error_probability(m, cand);
    if (err < best_err) {
      best = cand;
      best_err = err;
    }
  }

  ThresholdClassifier c;
  c.threshold = best;
  c.fidelity_minus = 1.0 - poisson_cdf(best, m.mu_minus);
  c.fidelity_zero = poisson_cdf(best, m.mu_zero);
  return c;
}

}  // namespace nvpd
