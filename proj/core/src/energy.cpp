#include "nvpd/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvpd/quadrature.hpp"

namespace nvpd {

namespace {

constexpr double kWindowSigmas = 8.0;
constexpr double kQuadRelTol = 1e-12;

// Integration window in the substituted variable u = sqrt(E - E0).
struct UWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
};

UWindow u_window(double hw, double e0, double sigma) {
  UWindow w;
  const double delta = hw - e0;
  const double hi2 = delta + kWindowSigmas * sigma;
  if (hi2 <= 0.0) return w;
  w.lo = std::sqrt(std::max(0.0, delta - kWindowSigmas * sigma));
  w.hi = std::sqrt(hi2);
  w.empty = false;
  return w;
}

// Integrals of u^2 (u^2 - delta)^m exp(-((u^2-delta)/sigma)^2/2), m = 0,1,2.
// The m = 0 case is the band-edge integral after u^2 = E - E0; the higher
// moments provide the analytic derivatives with respect to E0 and sigma.
double moment_integral(double hw, double e0, double sigma, int m) {
  const UWindow w = u_window(hw, e0, sigma);
  if (w.empty) return 0.0;
  const double delta = hw - e0;
  const double inv2s2 = 0.5 / (sigma * sigma);
  auto f = [&](double u) {
    const double d = u * u - delta;
    double factor = 1.0;
    for (int i = 0; i < m; ++i) factor *= d;
    return u * u * factor * std::exp(-d * d * inv2s2);
  };
  return 2.0 * integrate_adaptive(f, w.lo, w.hi, kQuadRelTol).value;
}

}  // namespace

EnergyFitParams::EnergyFitParams(double amplitude_, double e0, double sigma)
    : amplitude(amplitude_), e0_ev(e0), sigma_ev(sigma) {
  if (!(e0_ev > 0.0)) throw std::domain_error("band-edge energy must be > 0");
  if (!(sigma_ev > 0.0)) throw std::domain_error("sigma must be > 0");
}

double band_edge_integral(double hw_ev, double e0_ev, double sigma_ev) {
  return moment_integral(hw_ev, e0_ev, sigma_ev, 0);
}

double energy_model_rate(const EnergyFitParams& params, PhotonEnergy hw) {
  return params.amplitude *
         band_edge_integral(hw.ev, params.e0_ev, params.sigma_ev);
}

EnergySpectrumModel::EnergySpectrumModel(std::optional<double> fixed_sigma)
    : fixed_sigma_(fixed_sigma) {
  if (fixed_sigma_ && !(*fixed_sigma_ > 0.0))
    throw std::domain_error("fixed sigma must be positive");
}

int EnergySpectrumModel::parameter_count() const {
  return fixed_sigma_ ? 2 : 3;
}

double EnergySpectrumModel::sigma_of(const Eigen::VectorXd& q) const {
  return fixed_sigma_ ? *fixed_sigma_ : q(2);
}

double EnergySpectrumModel::evaluate(const Eigen::VectorXd& q, double hw,
                                     int) const {
  return q(0) * band_edge_integral(hw, q(1), sigma_of(q));
}

Eigen::VectorXd EnergySpectrumModel::gradient(const Eigen::VectorXd& q,
                                              double hw, int) const {
  const double a = q(0);
  const double e0 = q(1);
  const double sigma = sigma_of(q);
  const double i0 = moment_integral(hw, e0, sigma, 0);
  const double i1 = moment_integral(hw, e0, sigma, 1);
  Eigen::VectorXd g(parameter_count());
  g(0) = i0;
  // d/dE0 of the Gaussian factor: the window edges carry < 1e-14 of the
  // mass, so only the integrand derivative matters.
  g(1) = -a * i1 / (sigma * sigma);
  if (!fixed_sigma_) {
    const double i2 = moment_integral(hw, e0, sigma, 2);
    g(2) = a * i2 / (sigma * sigma * sigma);
  }
  return g;
}

EnergyFit fit_ionization_energy(const std::vector<double>& energies_ev,
                                const std::vector<double>& a_values,
                                const std::vector<double>& weights,
                                std::optional<double> fix_sigma) {
  if (energies_ev.size() != a_values.size())
    throw std::domain_error("energy and rate vectors differ in length");
  if (!weights.empty() && weights.size() != energies_ev.size())
    throw std::domain_error("weight vector has wrong length");
  const std::size_t min_points = fix_sigma ? 3 : 4;
  if (energies_ev.size() < min_points)
    throw std::domain_error("too few points for the spectral fit");

  std::vector<DataPoint> data(energies_ev.size());
  for (std::size_t i = 0; i < energies_ev.size(); ++i)
    data[i] = {energies_ev[i], a_values[i],
               weights.empty() ? 1.0 : weights[i], 0};

  const auto [hw_min_it, hw_max_it] =
      std::minmax_element(energies_ev.begin(), energies_ev.end());
  const double hw_min = *hw_min_it;
  const double hw_max = *hw_max_it;

  // Coarse scan over (E0, sigma) with the amplitude solved linearly; the
  // model is linear in A for fixed shape parameters.
  std::vector<double> sigma_grid;
  if (fix_sigma)
    sigma_grid = {*fix_sigma};
  else
    sigma_grid = {0.02, 0.05, 0.08, 0.12, 0.2};
  double best_sse = std::numeric_limits<double>::infinity();
  double best_e0 = 0.5 * (hw_min + hw_max);
  double best_sigma = sigma_grid.front();
  double best_a = 1.0;
  const int n_e0 = 41;
  const double e0_lo = hw_min - 0.3;
  const double e0_hi = hw_max + 0.3;
  for (double sigma : sigma_grid) {
    for (int k = 0; k < n_e0; ++k) {
      const double e0 = e0_lo + (e0_hi - e0_lo) * k / (n_e0 - 1);
      if (!(e0 > 0.0)) continue;
      double num = 0.0, den = 0.0;
      std::vector<double> integrals(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        integrals[i] = band_edge_integral(data[i].x, e0, sigma);
        num += data[i].weight * data[i].y * integrals[i];
        den += data[i].weight * integrals[i] * integrals[i];
      }
      if (!(den > 0.0)) continue;
      const double a = num / den;
      double sse = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = data[i].y - a * integrals[i];
        sse += data[i].weight * r * r;
      }
      if (sse < best_sse) {
        best_sse = sse;
        best_e0 = e0;
        best_sigma = sigma;
        best_a = a;
      }
    }
  }

  const EnergySpectrumModel model(fix_sigma);
  Eigen::VectorXd init(model.parameter_count());
  init(0) = best_a;
  init(1) = best_e0;
  if (!fix_sigma) init(2) = best_sigma;

  NlsOptions options;
  options.absolute_weights = !weights.empty();
  const NlsResult r = nls_fit(model, data, init, options);

  const double sigma = fix_sigma ? *fix_sigma : r.parameters(2);
  EnergyFit fit;
  fit.params = EnergyFitParams(r.parameters(0), r.parameters(1), sigma);
  fit.covariance = r.covariance;
  fit.weighted_sse = r.weighted_sse;
  fit.iterations = r.iterations;
  fit.converged = r.converged;
  fit.sigma_fixed = fix_sigma.has_value();
  fit.extrapolated = fit.params.e0_ev < hw_min || fit.params.e0_ev > hw_max;
  return fit;
}

}  // namespace nvpd
