#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "nvpd/nls.hpp"
#include "nvpd/units.hpp"

// Spectral model for the one-photon part of the charge-transition rates:
// a sqrt band-edge density of states convolved with a Gaussian photon/thermal
// energy distribution,
//
//   r(hw) = A * Int sqrt(E - E0) exp(-((E - hw)/sigma)^2 / 2) dE
//
// integrated over E in [max(E0, hw - 8 sigma), hw + 8 sigma]. The 8-sigma
// window truncates less than 1e-14 of the Gaussian mass, so results are
// bit-stable. E0 is the band-edge energy to extract.

namespace nvpd {

struct EnergyFitParams {
  double amplitude;   // rate units per eV^(3/2)
  double e0_ev;       // band-edge energy
  double sigma_ev;    // Gaussian width

  EnergyFitParams(double amplitude, double e0_ev, double sigma_ev);
};

// The band-edge integral without the amplitude prefactor. Evaluated by
// adaptive Gauss-Kronrod quadrature after the substitution u^2 = E - E0,
// which removes the sqrt endpoint singularity; relative accuracy 1e-8 or
// better.
double band_edge_integral(double hw_ev, double e0_ev, double sigma_ev);

// rate(hw) = amplitude * band_edge_integral(hw, E0, sigma).
double energy_model_rate(const EnergyFitParams& params, PhotonEnergy hw);

// CurveModel over photon energy; parameters (A, E0[, sigma]); sigma is a fit
// parameter unless fixed at construction.
class EnergySpectrumModel final : public CurveModel {
 public:
  explicit EnergySpectrumModel(std::optional<double> fixed_sigma = {});
  int parameter_count() const override;
  double evaluate(const Eigen::VectorXd& q, double hw, int) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& q, double hw,
                           int) const override;
  std::string name() const override { return "band_edge_spectrum"; }

 private:
  double sigma_of(const Eigen::VectorXd& q) const;
  std::optional<double> fixed_sigma_;
};

struct EnergyFit {
  EnergyFitParams params{1.0, 1.0, 0.1};
  Eigen::MatrixXd covariance;  // over the free parameters
  double weighted_sse = 0.0;
  int iterations = 0;
  bool converged = false;
  bool sigma_fixed = false;
  // Set when the fitted E0 lies outside the sampled energy window.
  bool extrapolated = false;
};

// Fits (A, E0[, sigma]) to linear-rate coefficients versus photon energy.
// Initialization scans E0 (and sigma when free) on a coarse grid with the
// amplitude solved linearly, then polishes with the damped least-squares
// engine. Needs >= 3 points with sigma fixed, >= 4 with sigma free.
EnergyFit fit_ionization_energy(const std::vector<double>& energies_ev,
                                const std::vector<double>& a_values,
                                const std::vector<double>& weights = {},
                                std::optional<double> fix_sigma = {});

}  // namespace nvpd
