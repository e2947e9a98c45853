#include "nvpd/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvpd/poisson.hpp"

namespace nvpd {

Eigen::Matrix2d transition_probabilities(const TwoStateRates& r, double dt_ms) {
  if (!(dt_ms > 0.0)) throw std::domain_error("bin width must be positive");
  Eigen::Matrix2d t = Eigen::Matrix2d::Identity();
  const double lambda = r.total();
  if (lambda > 0.0) {
    const double relax = 1.0 - std::exp(-lambda * dt_ms);
    t(0, 1) = (r.ionization / lambda) * relax;
    t(1, 0) = (r.recombination / lambda) * relax;
    t(0, 0) = 1.0 - t(0, 1);
    t(1, 1) = 1.0 - t(1, 0);
  }
  return t;
}

TwoStateRates rates_from_transition_probabilities(double p01, double p10,
                                                  double dt_ms) {
  if (!(dt_ms > 0.0)) throw std::domain_error("bin width must be positive");
  if (!(p01 >= 0.0) || !(p10 >= 0.0))
    throw std::domain_error("flip probabilities must be non-negative");
  const double s = p01 + p10;
  if (s == 0.0) return TwoStateRates(0.0, 0.0);
  if (s >= 1.0)
    throw std::domain_error(
        "per-bin flip probabilities sum to >= 1; no two-state generator "
        "produces that");
  const double lambda = -std::log(1.0 - s) / dt_ms;
  return TwoStateRates(p01 / s * lambda, p10 / s * lambda);
}

namespace {

struct Workspace {
  // Per-bin emission weights exp(logpmf - max) and the per-bin max.
  std::vector<double> b0, b1, bmax;
  std::vector<double> alpha0, alpha1, scale;
  std::vector<double> beta0, beta1;

  void resize(std::size_t n) {
    b0.resize(n);
    b1.resize(n);
    bmax.resize(n);
    alpha0.resize(n);
    alpha1.resize(n);
    scale.resize(n);
    beta0.resize(n);
    beta1.resize(n);
  }
};

void emission_weights(const std::vector<std::uint32_t>& counts, double mu0,
                      double mu1, Workspace& w) {
  for (std::size_t t = 0; t < counts.size(); ++t) {
    const double l0 = poisson_log_pmf(counts[t], mu0);
    const double l1 = poisson_log_pmf(counts[t], mu1);
    const double m = std::max(l0, l1);
    w.bmax[t] = m;
    w.b0[t] = std::exp(l0 - m);
    w.b1[t] = std::exp(l1 - m);
  }
}

// Scaled forward pass; returns the total log-likelihood.
double forward(const Eigen::Matrix2d& t, double pi0, const Workspace& w,
               std::vector<double>& a0, std::vector<double>& a1,
               std::vector<double>& scale) {
  const std::size_t n = w.b0.size();
  double ll = 0.0;
  double f0 = pi0 * w.b0[0];
  double f1 = (1.0 - pi0) * w.b1[0];
  double c = f0 + f1;
  a0[0] = f0 / c;
  a1[0] = f1 / c;
  scale[0] = c;
  ll += std::log(c) + w.bmax[0];
  for (std::size_t k = 1; k < n; ++k) {
    f0 = (a0[k - 1] * t(0, 0) + a1[k - 1] * t(1, 0)) * w.b0[k];
    f1 = (a0[k - 1] * t(0, 1) + a1[k - 1] * t(1, 1)) * w.b1[k];
    c = f0 + f1;
    a0[k] = f0 / c;
    a1[k] = f1 / c;
    scale[k] = c;
    ll += std::log(c) + w.bmax[k];
  }
  return ll;
}

void backward(const Eigen::Matrix2d& t, Workspace& w) {
  const std::size_t n = w.b0.size();
  w.beta0[n - 1] = 1.0;
  w.beta1[n - 1] = 1.0;
  for (std::size_t k = n - 1; k-- > 0;) {
    const double c = w.scale[k + 1];
    w.beta0[k] = (t(0, 0) * w.b0[k + 1] * w.beta0[k + 1] +
                  t(0, 1) * w.b1[k + 1] * w.beta1[k + 1]) /
                 c;
    w.beta1[k] = (t(1, 0) * w.b0[k + 1] * w.beta0[k + 1] +
                  t(1, 1) * w.b1[k + 1] * w.beta1[k + 1]) /
                 c;
  }
}

std::vector<ChargeState> viterbi_impl(const std::vector<std::uint32_t>& counts,
                                      const Eigen::Matrix2d& t, double pi0,
                                      double mu0, double mu1) {
  const std::size_t n = counts.size();
  const double neg_inf = -std::numeric_limits<double>::infinity();
  auto safe_log = [&](double x) { return x > 0.0 ? std::log(x) : neg_inf; };
  const double lt[2][2] = {{safe_log(t(0, 0)), safe_log(t(0, 1))},
                           {safe_log(t(1, 0)), safe_log(t(1, 1))}};

  std::vector<std::uint8_t> back(2 * n, 0);
  double v0 = safe_log(pi0) + poisson_log_pmf(counts[0], mu0);
  double v1 = safe_log(1.0 - pi0) + poisson_log_pmf(counts[0], mu1);
  for (std::size_t k = 1; k < n; ++k) {
    const double e0 = poisson_log_pmf(counts[k], mu0);
    const double e1 = poisson_log_pmf(counts[k], mu1);
    const double c00 = v0 + lt[0][0], c10 = v1 + lt[1][0];
    const double c01 = v0 + lt[0][1], c11 = v1 + lt[1][1];
    double n0, n1;
    if (c00 >= c10) {
      n0 = c00 + e0;
      back[2 * k] = 0;
    } else {
      n0 = c10 + e0;
      back[2 * k] = 1;
    }
    if (c01 >= c11) {
      n1 = c01 + e1;
      back[2 * k + 1] = 0;
    } else {
      n1 = c11 + e1;
      back[2 * k + 1] = 1;
    }
    v0 = n0;
    v1 = n1;
  }

  std::vector<ChargeState> path(n);
  int s = v0 >= v1 ? 0 : 1;
  path[n - 1] = s == 0 ? ChargeState::Negative : ChargeState::Neutral;
  for (std::size_t k = n - 1; k-- > 0;) {
    s = back[2 * (k + 1) + s];
    path[k] = s == 0 ? ChargeState::Negative : ChargeState::Neutral;
  }
  return path;
}

struct EmInit {
  double mu0 = 0.0, mu1 = 0.0;  // state 0 = bright here until final labeling
  double pi0 = 0.5;
  Eigen::Matrix2d t = Eigen::Matrix2d::Identity();
  bool degenerate = false;
};

// 2-means clustering of the counts; rates seeded from level crossings of the
// hard threshold assignment.
EmInit init_from_counts(const std::vector<std::uint32_t>& counts,
                        double dt_ms) {
  EmInit init;
  const auto [mn_it, mx_it] = std::minmax_element(counts.begin(), counts.end());
  if (*mn_it == *mx_it) {
    init.degenerate = true;
    return init;
  }
  double c_lo = *mn_it, c_hi = *mx_it;
  for (int iter = 0; iter < 100; ++iter) {
    double s_lo = 0.0, n_lo = 0.0, s_hi = 0.0, n_hi = 0.0;
    const double split = 0.5 * (c_lo + c_hi);
    for (const auto c : counts) {
      if (c <= split) {
        s_lo += c;
        n_lo += 1.0;
      } else {
        s_hi += c;
        n_hi += 1.0;
      }
    }
    if (n_lo == 0.0 || n_hi == 0.0) break;
    const double new_lo = s_lo / n_lo, new_hi = s_hi / n_hi;
    const bool stable =
        std::fabs(new_lo - c_lo) < 1e-12 && std::fabs(new_hi - c_hi) < 1e-12;
    c_lo = new_lo;
    c_hi = new_hi;
    if (stable) break;
  }
  if (!(c_hi > c_lo)) {
    init.degenerate = true;
    return init;
  }

  const double split = 0.5 * (c_lo + c_hi);
  std::size_t n_bright = 0, n_dark = 0, bright_to_dark = 0, dark_to_bright = 0;
  bool prev_bright = counts[0] > split;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const bool bright = counts[k] > split;
    if (bright)
      ++n_bright;
    else
      ++n_dark;
    if (k > 0) {
      if (prev_bright && !bright) ++bright_to_dark;
      if (!prev_bright && bright) ++dark_to_bright;
    }
    prev_bright = bright;
  }
  // At least half a crossing so seeded rates stay positive.
  const double r_bd = std::max(0.5, static_cast<double>(bright_to_dark)) /
                      (std::max<std::size_t>(n_bright, 1) * dt_ms);
  const double r_db = std::max(0.5, static_cast<double>(dark_to_bright)) /
                      (std::max<std::size_t>(n_dark, 1) * dt_ms);

  init.mu0 = c_hi;  // state 0 = bright
  init.mu1 = c_lo;
  init.pi0 = static_cast<double>(n_bright) / counts.size();
  init.pi0 = std::clamp(init.pi0, 1e-6, 1.0 - 1e-6);
  init.t = transition_probabilities(TwoStateRates(r_bd, r_db), dt_ms);
  return init;
}

HmmEstimate degenerate_estimate(const PhotonTrace& trace) {
  HmmEstimate est;
  est.status = HmmStatus::DegenerateTrace;
  double mean = 0.0;
  for (const auto c : trace.counts) mean += c;
  mean /= trace.counts.size();
  const double level = mean / trace.bin_ms;
  est.emission = EmissionModel(level > 0.0 ? level : 1e-12, 0.0, trace.bin_ms);
  est.path.assign(trace.counts.size(), ChargeState::Negative);
  est.initial = ChargeDistribution(1.0, 0.0);
  double ll = 0.0;
  for (const auto c : trace.counts) ll += poisson_log_pmf(c, mean);
  est.log_likelihood = ll;
  est.converged = true;
  return est;
}

}  // namespace

double hmm_log_likelihood(const PhotonTrace& trace, const TwoStateRates& r,
                          const EmissionModel& em,
                          const ChargeDistribution& initial) {
  if (trace.counts.empty()) throw std::domain_error("empty trace");
  Workspace w;
  w.resize(trace.counts.size());
  emission_weights(trace.counts, em.fl_minus * trace.bin_ms,
                   em.fl_zero * trace.bin_ms, w);
  const Eigen::Matrix2d t = transition_probabilities(r, trace.bin_ms);
  return forward(t, initial.p_minus, w, w.alpha0, w.alpha1, w.scale);
}

std::vector<ChargeState> viterbi_path(const PhotonTrace& trace,
                                      const TwoStateRates& r,
                                      const EmissionModel& em,
                                      const ChargeDistribution& initial) {
  if (trace.counts.empty()) throw std::domain_error("empty trace");
  const Eigen::Matrix2d t = transition_probabilities(r, trace.bin_ms);
  return viterbi_impl(trace.counts, t, initial.p_minus,
                      em.fl_minus * trace.bin_ms, em.fl_zero * trace.bin_ms);
}

HmmEstimate hmm_fit(const PhotonTrace& trace,
                    const std::optional<HmmEstimate>& seed,
                    const HmmOptions& options) {
  const std::size_t n = trace.counts.size();
  if (n < 100) throw std::domain_error("trace must have at least 100 bins");
  const double dt = trace.bin_ms;

  EmInit init;
  if (seed) {
    init.mu0 = seed->emission.fl_minus * dt;
    init.mu1 = seed->emission.fl_zero * dt;
    init.pi0 = std::clamp(seed->initial.p_minus, 1e-6, 1.0 - 1e-6);
    init.t = transition_probabilities(seed->rates, dt);
  } else {
    init = init_from_counts(trace.counts, dt);
    if (init.degenerate) return degenerate_estimate(trace);
  }

  // State 0 carries the bright level during EM; labels are fixed afterwards.
  double mu0 = std::max(init.mu0, 1e-12);
  double mu1 = std::max(init.mu1, 1e-12);
  double pi0 = init.pi0;
  Eigen::Matrix2d t = init.t;

  Workspace w;
  w.resize(n);

  HmmEstimate est;
  double prev_ll = -std::numeric_limits<double>::infinity();
  double ll = prev_ll;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    est.iterations = iter + 1;
    emission_weights(trace.counts, mu0, mu1, w);
    ll = forward(t, pi0, w, w.alpha0, w.alpha1, w.scale);
    if (ll < prev_ll - 1e-8 * (1.0 + std::fabs(prev_ll)))
      throw std::logic_error("EM log-likelihood decreased");
    const bool done =
        std::fabs(ll - prev_ll) <= options.rel_ll_tol * (1.0 + std::fabs(ll));
    prev_ll = ll;
    if (done) {
      est.converged = true;
      break;
    }

    backward(t, w);

    double g0_sum = 0.0, g1_sum = 0.0, g0_counts = 0.0, g1_counts = 0.0;
    double g0_trans = 0.0, g1_trans = 0.0;  // occupancy over t < n-1
    double xi00 = 0.0, xi01 = 0.0, xi10 = 0.0, xi11 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double g0 = w.alpha0[k] * w.beta0[k];
      const double g1 = w.alpha1[k] * w.beta1[k];
      g0_sum += g0;
      g1_sum += g1;
      g0_counts += g0 * trace.counts[k];
      g1_counts += g1 * trace.counts[k];
      if (k + 1 < n) {
        g0_trans += g0;
        g1_trans += g1;
        const double c = w.scale[k + 1];
        xi00 += w.alpha0[k] * t(0, 0) * w.b0[k + 1] * w.beta0[k + 1] / c;
        xi01 += w.alpha0[k] * t(0, 1) * w.b1[k + 1] * w.beta1[k + 1] / c;
        xi10 += w.alpha1[k] * t(1, 0) * w.b0[k + 1] * w.beta0[k + 1] / c;
        xi11 += w.alpha1[k] * t(1, 1) * w.b1[k + 1] * w.beta1[k + 1] / c;
      }
    }

    mu0 = g0_sum > 0.0 ? std::max(g0_counts / g0_sum, 1e-12) : mu0;
    mu1 = g1_sum > 0.0 ? std::max(g1_counts / g1_sum, 1e-12) : mu1;
    if (g0_trans > 0.0) {
      t(0, 0) = std::clamp(xi00 / g0_trans, 1e-12, 1.0);
      t(0, 1) = std::clamp(xi01 / g0_trans, 1e-12, 1.0);
      const double row0 = t(0, 0) + t(0, 1);
      t(0, 0) /= row0;
      t(0, 1) /= row0;
    }
    if (g1_trans > 0.0) {
      t(1, 0) = std::clamp(xi10 / g1_trans, 1e-12, 1.0);
      t(1, 1) = std::clamp(xi11 / g1_trans, 1e-12, 1.0);
      const double row1 = t(1, 0) + t(1, 1);
      t(1, 0) /= row1;
      t(1, 1) /= row1;
    }
    const double g0_first = w.alpha0[0] * w.beta0[0];
    const double g1_first = w.alpha1[0] * w.beta1[0];
    pi0 = std::clamp(g0_first / (g0_first + g1_first), 1e-12, 1.0 - 1e-12);
  }
  est.log_likelihood = ll;

  // Fix labels: Negative is the brighter state.
  if (mu0 < mu1) {
    std::swap(mu0, mu1);
    pi0 = 1.0 - pi0;
    Eigen::Matrix2d swapped;
    swapped << t(1, 1), t(1, 0), t(0, 1), t(0, 0);
    t = swapped;
  }

  est.emission = EmissionModel(mu0 / dt, mu1 / dt, dt);
  est.initial = ChargeDistribution(pi0, 1.0 - pi0);
  est.rates_raw = TwoStateRates(t(0, 1) / dt, t(1, 0) / dt);
  if (t(0, 1) + t(1, 0) < 1.0) {
    est.rates = rates_from_transition_probabilities(t(0, 1), t(1, 0), dt);
  } else {
    est.rates = est.rates_raw;
    est.status = HmmStatus::RateInversionFailed;
  }
  est.path = viterbi_impl(trace.counts, t, pi0, mu0, mu1);
  return est;
}

}  // namespace nvpd
