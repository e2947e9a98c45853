#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nvpd/kinetics.hpp"
#include "nvpd/nls.hpp"
#include "nvpd/units.hpp"

// Fits built on the shared least-squares engine: joint exponential flip
// curves, rate-vs-power parabolas, and saturation curves.

namespace nvpd {

// rate(p) = a p + b p^2 with gradient (p, p^2).
class ParabolaRateModel final : public CurveModel {
 public:
  int parameter_count() const override { return 2; }
  double evaluate(const Eigen::VectorXd& q, double x, int) const override {
    return q(0) * x + q(1) * x * x;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd&, double x,
                           int) const override {
    Eigen::VectorXd g(2);
    g << x, x * x;
    return g;
  }
  std::string name() const override { return "rate_power_parabola"; }
};

// F(I) = F_S I / (I + I_S), parameters (F_S, I_S).
class SaturationModel final : public CurveModel {
 public:
  int parameter_count() const override { return 2; }
  double evaluate(const Eigen::VectorXd& q, double x, int) const override {
    return q(0) * x / (x + q(1));
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& q, double x,
                           int) const override {
    const double d = x + q(1);
    Eigen::VectorXd g(2);
    g << x / d, -q(0) * x / (d * d);
    return g;
  }
  std::string name() const override { return "saturation"; }
};

// Both branches of the charge-flip curve with shared parameters
// (lambda_tot, p_inf): series 0 starts in Negative with asymptote p_inf,
// series 1 starts in Neutral with asymptote 1 - p_inf.
class FlipCurveModel final : public CurveModel {
 public:
  int parameter_count() const override { return 2; }
  double evaluate(const Eigen::VectorXd& q, double t,
                  int series) const override {
    const double rise = 1.0 - std::exp(-q(0) * t);
    return (series == 0 ? q(1) : 1.0 - q(1)) * rise;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& q, double t,
                           int series) const override {
    const double decay = std::exp(-q(0) * t);
    const double amp = series == 0 ? q(1) : 1.0 - q(1);
    Eigen::VectorXd g(2);
    g << amp * t * decay, (series == 0 ? 1.0 : -1.0) * (1.0 - decay);
    return g;
  }
  std::string name() const override { return "charge_flip_exponential"; }
};

struct FlipObservation {
  ChargeState initial = ChargeState::Negative;
  double duration_ms = 0.0;
  double p_flip = 0.0;
  double weight = 1.0;
};

struct FlipCurveFit {
  TwoStateRates rates{0.0, 0.0};
  double lambda_tot = 0.0;
  double p_infinity = 0.0;  // asymptote of the starting-from-Negative branch
  Eigen::Matrix2d covariance;        // over (lambda_tot, p_inf)
  Eigen::Matrix2d covariance_rates;  // propagated to (ion, rec)
  double weighted_sse = 0.0;
  int iterations = 0;
  bool converged = false;
  // Set when the duration grid does not span ~1/lambda_tot.
  bool underspanned = false;
};

// Joint fit of the flip curve; one branch alone is accepted (with a wider
// covariance). Needs >= 4 distinct durations. Throws FitError when the fit
// is not exponential-saturating (lambda_tot <= 0).
FlipCurveFit fit_flip_curve(const std::vector<FlipObservation>& observations,
                            bool absolute_weights = true);

// Binomial flip estimate with a Wilson-interval weight (z = 1), the
// weighting used when flip probabilities come from classified shot counts.
FlipObservation flip_estimate_from_counts(ChargeState initial,
                                          double duration_ms,
                                          std::int64_t n_flipped,
                                          std::int64_t n_total);

struct PowerLawFit {
  PowerLawRate rate;
  Eigen::Matrix2d covariance;
  double weighted_sse = 0.0;
  bool converged = false;
};

// Least-squares (a, b) of rate(p) = a p + b p^2.
PowerLawFit fit_rate_vs_power(const std::vector<double>& powers_uw,
                              const std::vector<double>& rates_per_ms,
                              const std::vector<double>& weights = {});

struct SaturationFit {
  double f_s = 0.0;  // saturation fluorescence, counts/ms
  double i_s = 0.0;  // saturation power, uW
  Eigen::Matrix2d covariance;
  double weighted_sse = 0.0;
  int iterations = 0;
  bool converged = false;
  // Set when max(I) < I_S/3: the grid never approaches saturation and the
  // covariance is correspondingly wide.
  bool non_saturating = false;
};

SaturationFit fit_saturation(const std::vector<double>& powers_uw,
                             const std::vector<double>& fluorescence,
                             const std::vector<double>& weights = {});

}  // namespace nvpd
