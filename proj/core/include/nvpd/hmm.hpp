#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "nvpd/kinetics.hpp"
#include "nvpd/sim.hpp"

// Two-state hidden Markov model with Poisson emissions: Baum-Welch parameter
// estimation, forward likelihood, and Viterbi path recovery for telegraph
// fluorescence traces.

namespace nvpd {

// Exact per-bin transition matrix exp(A dt) of the two-state generator.
// Row i = state at bin start (0 = Negative, 1 = Neutral).
Eigen::Matrix2d transition_probabilities(const TwoStateRates& r, double dt_ms);

// Inverse of the above: recovers continuous rates from per-bin flip
// probabilities. Throws if p01 + p10 >= 1 (no generator reproduces that).
TwoStateRates rates_from_transition_probabilities(double p01, double p10,
                                                  double dt_ms);

// Forward-algorithm log-likelihood of a trace under explicit parameters.
// The bin width is taken from the trace.
double hmm_log_likelihood(const PhotonTrace& trace, const TwoStateRates& r,
                          const EmissionModel& em,
                          const ChargeDistribution& initial);

std::vector<ChargeState> viterbi_path(const PhotonTrace& trace,
                                      const TwoStateRates& r,
                                      const EmissionModel& em,
                                      const ChargeDistribution& initial);

enum class HmmStatus {
  Ok,
  // Constant-count trace: single-state fallback returned.
  DegenerateTrace,
  // Fitted per-bin flip probabilities sum to >= 1; rates fall back to the
  // raw per-bin values.
  RateInversionFailed,
};

struct HmmEstimate {
  // Continuous rates recovered through the exact matrix-exponential inverse
  // (free of bin-discretization bias) and the raw per-bin flip probabilities
  // divided by the bin width.
  TwoStateRates rates{0.0, 0.0};
  TwoStateRates rates_raw{0.0, 0.0};
  EmissionModel emission{1.0, 0.0, 1.0};  // fitted levels, counts/ms
  ChargeDistribution initial{1.0, 0.0};
  std::vector<ChargeState> path;  // Viterbi path at the fitted parameters
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  HmmStatus status = HmmStatus::Ok;
};

struct HmmOptions {
  int max_iterations = 500;
  double rel_ll_tol = 1e-10;
};

// Baum-Welch EM over the 2-state chain. Unseeded fits start from 2-means
// clustering of the bin counts with rates seeded from level crossings of the
// hard assignment. Requires >= 100 bins.
HmmEstimate hmm_fit(const PhotonTrace& trace,
                    const std::optional<HmmEstimate>& seed = {},
                    const HmmOptions& options = {});

}  // namespace nvpd
