#include "nvpd/fits.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace nvpd {

FlipObservation flip_estimate_from_counts(ChargeState initial,
                                          double duration_ms,
                                          std::int64_t n_flipped,
                                          std::int64_t n_total) {
  if (n_total < 1 || n_flipped < 0 || n_flipped > n_total)
    throw std::domain_error("invalid flip counts");
  const double n = static_cast<double>(n_total);
  const double p_hat = static_cast<double>(n_flipped) / n;
  // Wilson interval halfwidth at z = 1; never zero, so weights stay finite
  // even for all-or-nothing observations.
  const double half =
      std::sqrt(p_hat * (1.0 - p_hat) / n + 0.25 / (n * n)) / (1.0 + 1.0 / n);
  FlipObservation obs;
  obs.initial = initial;
  obs.duration_ms = duration_ms;
  obs.p_flip = p_hat;
  obs.weight = 1.0 / (half * half);
  return obs;
}

FlipCurveFit fit_flip_curve(const std::vector<FlipObservation>& observations,
                            bool absolute_weights) {
  std::set<double> durations;
  for (const auto& o : observations) durations.insert(o.duration_ms);
  if (durations.size() < 4)
    throw std::domain_error("flip-curve fit needs >= 4 distinct durations");

  std::vector<DataPoint> data;
  data.reserve(observations.size());
  double max_duration = 0.0;
  double max_flip = 0.0;
  for (const auto& o : observations) {
    if (!(o.duration_ms >= 0.0))
      throw std::domain_error("durations must be non-negative");
    data.push_back({o.duration_ms, o.p_flip, o.weight,
                    o.initial == ChargeState::Negative ? 0 : 1});
    max_duration = std::max(max_duration, o.duration_ms);
    max_flip = std::max(max_flip, o.p_flip);
  }

  Eigen::VectorXd init(2);
  init << 2.0 / max_duration, std::clamp(max_flip, 0.05, 0.95);

  NlsOptions options;
  options.absolute_weights = absolute_weights;
  const FlipCurveModel model;
  const NlsResult r = nls_fit(model, data, init, options);

  const double lambda = r.parameters(0);
  double p_inf = r.parameters(1);
  if (!(lambda > 0.0))
    throw FitError("flip curve is not exponential-saturating");
  if (!(p_inf >= -1e-6 && p_inf <= 1.0 + 1e-6))
    throw FitError("fitted asymptote outside [0, 1]");
  p_inf = std::clamp(p_inf, 0.0, 1.0);

  FlipCurveFit fit;
  fit.rates = rates_from_flip_fit(p_inf, lambda);
  fit.lambda_tot = lambda;
  fit.p_infinity = p_inf;
  fit.covariance = r.covariance;
  // (ion, rec) = (p lambda, (1-p) lambda): propagate linearly.
  Eigen::Matrix2d j;
  j << p_inf, lambda, 1.0 - p_inf, -lambda;
  fit.covariance_rates = j * r.covariance * j.transpose();
  fit.weighted_sse = r.weighted_sse;
  fit.iterations = r.iterations;
  fit.converged = r.converged;
  fit.underspanned = max_duration * lambda < 1.0;
  return fit;
}

PowerLawFit fit_rate_vs_power(const std::vector<double>& powers_uw,
                              const std::vector<double>& rates_per_ms,
                              const std::vector<double>& weights) {
  if (powers_uw.size() != rates_per_ms.size())
    throw std::domain_error("power and rate vectors differ in length");
  if (!weights.empty() && weights.size() != powers_uw.size())
    throw std::domain_error("weight vector has wrong length");
  if (powers_uw.size() < 3)
    throw std::domain_error("rate-vs-power fit needs >= 3 points");

  std::vector<DataPoint> data(powers_uw.size());
  for (std::size_t i = 0; i < powers_uw.size(); ++i)
    data[i] = {powers_uw[i], rates_per_ms[i],
               weights.empty() ? 1.0 : weights[i], 0};

  NlsOptions options;
  options.absolute_weights = !weights.empty();
  const ParabolaRateModel model;
  const NlsResult r = nls_fit(model, data, Eigen::Vector2d(0.0, 0.0), options);

  PowerLawFit fit;
  fit.rate = PowerLawRate{r.parameters(0), r.parameters(1)};
  fit.covariance = r.covariance;
  fit.weighted_sse = r.weighted_sse;
  fit.converged = r.converged;
  return fit;
}

SaturationFit fit_saturation(const std::vector<double>& powers_uw,
                             const std::vector<double>& fluorescence,
                             const std::vector<double>& weights) {
  if (powers_uw.size() != fluorescence.size())
    throw std::domain_error("power and fluorescence vectors differ in length");
  if (!weights.empty() && weights.size() != powers_uw.size())
    throw std::domain_error("weight vector has wrong length");
  if (powers_uw.size() < 3)
    throw std::domain_error("saturation fit needs >= 3 points");

  std::vector<DataPoint> data;
  data.reserve(powers_uw.size());
  double f_max = 0.0, i_max = 0.0;
  for (std::size_t i = 0; i < powers_uw.size(); ++i) {
    data.push_back({powers_uw[i], fluorescence[i],
                    weights.empty() ? 1.0 : weights[i], 0});
    f_max = std::max(f_max, fluorescence[i]);
    i_max = std::max(i_max, powers_uw[i]);
  }
  if (!(f_max > 0.0)) throw std::domain_error("fluorescence is all zero");

  // Start from the largest point and the power where the curve reaches half
  // of it.
  double i_half = 0.5 * i_max;
  for (std::size_t i = 0; i < powers_uw.size(); ++i) {
    if (fluorescence[i] >= 0.5 * f_max) {
      i_half = std::max(powers_uw[i], 1e-6);
      break;
    }
  }
  Eigen::VectorXd init(2);
  init << 1.5 * f_max, i_half;

  NlsOptions options;
  options.absolute_weights = !weights.empty();
  const SaturationModel model;
  const NlsResult r = nls_fit(model, data, init, options);

  SaturationFit fit;
  fit.f_s = r.parameters(0);
  fit.i_s = r.parameters(1);
  fit.covariance = r.covariance;
  fit.weighted_sse = r.weighted_sse;
  fit.iterations = r.iterations;
  fit.converged = r.converged;
  fit.non_saturating = i_max < fit.i_s / 3.0;
  return fit;
}

}  // namespace nvpd
