#include "nvpd/kinetics.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace nvpd {

TwoStateRates::TwoStateRates(double lambda_ionization,
                             double lambda_recombination)
    : ionization(lambda_ionization), recombination(lambda_recombination) {
  if (!(ionization >= 0.0) || !(recombination >= 0.0))
    throw std::domain_error("transition rates must be non-negative");
}

TwoStateRates TwoStateRates::from_lifetimes(double t_minus_ms,
                                            double t_zero_ms) {
  if (!(t_minus_ms > 0.0) || !(t_zero_ms > 0.0))
    throw std::domain_error("lifetimes must be positive");
  return TwoStateRates(1.0 / t_minus_ms, 1.0 / t_zero_ms);
}

ChargeDistribution::ChargeDistribution(double probability_minus,
                                       double probability_zero)
    : p_minus(probability_minus), p_zero(probability_zero) {
  if (!(p_minus >= -1e-12 && p_minus <= 1.0 + 1e-12) ||
      !(p_zero >= -1e-12 && p_zero <= 1.0 + 1e-12))
    throw std::domain_error("probabilities must lie in [0, 1]");
  if (std::fabs(p_minus + p_zero - 1.0) > 1e-9)
    throw std::domain_error("charge distribution must sum to 1");
}

ChargeDistribution steady_state(const TwoStateRates& r) {
  const double lambda = r.total();
  if (!(lambda > 0.0))
    throw std::domain_error("no steady state: both rates are zero");
  const double p_minus = r.recombination / lambda;
  return ChargeDistribution(p_minus, 1.0 - p_minus);
}

ChargeDistribution evolve(const TwoStateRates& r, const ChargeDistribution& p0,
                          double t_ms) {
  if (!(t_ms >= 0.0)) throw std::domain_error("evolution time must be >= 0");
  const double lambda = r.total();
  if (lambda == 0.0) return p0;
  // Any zero-sum vector is an eigenvector of the generator with eigenvalue
  // -lambda, so the transient decays with the single rate lambda.
  const double p_inf = r.recombination / lambda;
  const double decay = std::exp(-lambda * t_ms);
  const double p_minus = p_inf + (p0.p_minus - p_inf) * decay;
  return ChargeDistribution(p_minus, 1.0 - p_minus);
}

double flip_probability(const TwoStateRates& r, ChargeState initial,
                        double t_ms) {
  if (!(t_ms >= 0.0)) throw std::domain_error("evolution time must be >= 0");
  const double lambda = r.total();
  if (lambda == 0.0) return 0.0;
  const double out_rate = r.leave_rate(initial);
  return (out_rate / lambda) * (1.0 - std::exp(-lambda * t_ms));
}

TwoStateRates rates_from_flip_fit(double p_inf_from_minus, double lambda_tot) {
  if (!(p_inf_from_minus >= 0.0 && p_inf_from_minus <= 1.0))
    throw std::domain_error("asymptotic flip probability must lie in [0, 1]");
  if (!(lambda_tot > 0.0))
    throw std::domain_error("total rate must be positive");
  return TwoStateRates(p_inf_from_minus * lambda_tot,
                       (1.0 - p_inf_from_minus) * lambda_tot);
}

TwoStateRates power_scaled_rates(const PowerLawRate& ionization,
                                 const PowerLawRate& recombination, Power p) {
  return TwoStateRates(ionization.at(p), recombination.at(p));
}

FourLevelParams::FourLevelParams(double sigma_, double sigma_ion_,
                                 double sigma_re_, double lambda_eg_,
                                 double lambda_em_, double lambda_mg_,
                                 double i0_)
    : sigma(sigma_),
      sigma_ion(sigma_ion_),
      sigma_re(sigma_re_),
      lambda_eg(lambda_eg_),
      lambda_em(lambda_em_),
      lambda_mg(lambda_mg_),
      i0(i0_) {
  if (!(sigma >= 0.0) || !(sigma_ion >= 0.0) || !(sigma_re >= 0.0) ||
      !(lambda_em >= 0.0) || !(lambda_mg >= 0.0) || !(i0 >= 0.0))
    throw std::domain_error("four-level parameters must be non-negative");
  if (!(lambda_eg > 0.0))
    throw std::domain_error("fluorescence decay rate must be positive");
}

double FourLevelParams::recombination_rate(double intensity_uw) const {
  if (intensity_uw == 0.0) return 0.0;
  return sigma_re * intensity_uw * intensity_uw / (intensity_uw + i0);
}

FourLevelState four_level_steady_state(const FourLevelParams& fp,
                                       Power intensity) {
  const double I = intensity.uw;
  const double r_re = fp.recombination_rate(I);

  // Generator of dp/dt = A p over (G, E, M, 0).
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a(0, 0) = -I * fp.sigma;
  a(0, 1) = fp.lambda_eg;
  a(0, 2) = fp.lambda_mg;
  a(0, 3) = r_re;
  a(1, 0) = I * fp.sigma;
  a(1, 1) = -(fp.lambda_eg + fp.lambda_em + I * fp.sigma_ion);
  a(2, 1) = fp.lambda_em;
  a(2, 2) = -fp.lambda_mg;
  a(3, 1) = I * fp.sigma_ion;
  a(3, 3) = -r_re;

  // The columns of A sum to zero, so the G row is redundant; replace it with
  // the normalization row and solve.
  Eigen::Matrix4d m = a;
  m.row(0).setOnes();
  Eigen::Vector4d rhs(1.0, 0.0, 0.0, 0.0);

  Eigen::FullPivLU<Eigen::Matrix4d> lu(m);
  FourLevelState out;
  if (!lu.isInvertible()) {
    out.degenerate = true;  // ground-state-only by convention
    return out;
  }
  Eigen::Vector4d p = lu.solve(rhs);
  // Round-off can leave tiny negative entries; clamp and renormalize.
  for (int i = 0; i < 4; ++i) p(i) = std::max(p(i), 0.0);
  p /= p.sum();
  out.p_g = p(0);
  out.p_e = p(1);
  out.p_m = p(2);
  out.p_0 = p(3);
  return out;
}

std::vector<std::pair<double, double>> saturation_curve(
    const FourLevelParams& fp, const std::vector<double>& powers_uw,
    double detection_efficiency) {
  if (powers_uw.empty()) throw std::domain_error("power grid is empty");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(powers_uw.size());
  for (double p : powers_uw) {
    if (!(p >= 0.0)) throw std::domain_error("powers must be non-negative");
    const FourLevelState s = four_level_steady_state(fp, Power(p));
    curve.emplace_back(p, detection_efficiency * fp.lambda_eg * s.p_e);
  }
  return curve;
}

}  // namespace nvpd
