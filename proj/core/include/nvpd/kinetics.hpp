#pragma once

#include <utility>
#include <vector>

#include "nvpd/units.hpp"

// Rate-equation models of the photo-induced charge dynamics: the two-state
// ionization/recombination chain and the four-level saturation model.

namespace nvpd {

// Transition rates between the charge states, in ms^-1.
struct TwoStateRates {
  double ionization;     // NV- -> NV0
  double recombination;  // NV0 -> NV-

  TwoStateRates(double lambda_ionization, double lambda_recombination);

  double total() const { return ionization + recombination; }
  // Charge-state lifetimes are the inverse transition rates.
  double lifetime_minus_ms() const { return 1.0 / ionization; }
  double lifetime_zero_ms() const { return 1.0 / recombination; }
  static TwoStateRates from_lifetimes(double t_minus_ms, double t_zero_ms);

  double leave_rate(ChargeState s) const {
    return s == ChargeState::Negative ? ionization : recombination;
  }
};

struct ChargeDistribution {
  double p_minus;
  double p_zero;

  // Validates p_minus + p_zero = 1 (1e-9 slack) and both in [0,1].
  ChargeDistribution(double probability_minus, double probability_zero);

  static ChargeDistribution pure(ChargeState s) {
    return s == ChargeState::Negative ? ChargeDistribution(1.0, 0.0)
                                      : ChargeDistribution(0.0, 1.0);
  }
  double probability(ChargeState s) const {
    return s == ChargeState::Negative ? p_minus : p_zero;
  }
};

// Stationary distribution of the two-state chain. Requires total() > 0.
ChargeDistribution steady_state(const TwoStateRates& r);

// Closed-form evolution over t_ms: p(t) = p_inf + (p0 - p_inf) e^(-lambda t)
// with lambda = total rate. With both rates zero the distribution is frozen.
ChargeDistribution evolve(const TwoStateRates& r, const ChargeDistribution& p0,
                          double t_ms);

// Probability that the state at time t differs from `initial`.
double flip_probability(const TwoStateRates& r, ChargeState initial,
                        double t_ms);

// Inverse of the flip-curve parametrization: the asymptote of the
// starting-from-NV- branch is lambda_ion / lambda_tot.
TwoStateRates rates_from_flip_fit(double p_inf_from_minus, double lambda_tot);

// rate(p) = a*p + b*p^2.
struct PowerLawRate {
  double a = 0.0;  // ms^-1 uW^-1
  double b = 0.0;  // ms^-1 uW^-2

  double at(Power p) const { return a * p.uw + b * p.uw * p.uw; }
  // Small negative coefficients from noisy fits are clamped for reporting;
  // the raw values stay in a/b.
  double a_clamped() const { return a > 0.0 ? a : 0.0; }
  double b_clamped() const { return b > 0.0 ? b : 0.0; }
};

TwoStateRates power_scaled_rates(const PowerLawRate& ionization,
                                 const PowerLawRate& recombination, Power p);

// Parameters of the four-level model: NV- ground (G), excited (E) and
// metastable (M) states plus one effective NV0 state (0). Cross-sections are
// per unit intensity (uW^-1 ms^-1), decay rates in ms^-1, i0 in uW.
struct FourLevelParams {
  double sigma;       // G -> E absorption
  double sigma_ion;   // E -> 0 ionization
  double sigma_re;    // effective 0 -> G recombination cross-section
  double lambda_eg;   // E -> G fluorescence decay
  double lambda_em;   // E -> M shelving
  double lambda_mg;   // M -> G de-shelving
  double i0;          // NV0 saturation power

  FourLevelParams(double sigma, double sigma_ion, double sigma_re,
                  double lambda_eg, double lambda_em, double lambda_mg,
                  double i0);

  // Effective recombination rate at intensity I: sigma_re * I^2 / (I + i0).
  double recombination_rate(double intensity_uw) const;
};

struct FourLevelState {
  double p_g = 1.0;
  double p_e = 0.0;
  double p_m = 0.0;
  double p_0 = 0.0;
  // Set when the steady state is not unique (e.g. I = 0); the populations
  // then default to the ground state by convention.
  bool degenerate = false;

  double sum() const { return p_g + p_e + p_m + p_0; }
};

// Steady state of the four-level model by direct linear solve of the
// rank-deficient generator with a normalization row.
FourLevelState four_level_steady_state(const FourLevelParams& fp, Power intensity);

// Fluorescence(I) = detection_efficiency * lambda_eg * p_E(I) over the grid.
std::vector<std::pair<double, double>> saturation_curve(
    const FourLevelParams& fp, const std::vector<double>& powers_uw,
    double detection_efficiency = 1.0);

}  // namespace nvpd
