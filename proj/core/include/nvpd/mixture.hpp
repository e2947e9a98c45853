#pragma once

#include <cstdint>
#include <vector>

#include "nvpd/units.hpp"

// Two-Poisson mixture fit of single-shot count histograms and the derived
// count-threshold charge classifier.

namespace nvpd {

struct PoissonMixture {
  double mu_zero = 0.0;    // mean counts of the dark component
  double mu_minus = 0.0;   // mean counts of the bright component
  double amp_zero = 0.0;   // amplitudes, normalized to total shots
  double amp_minus = 0.0;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  // False when the component means collapse (|mu_minus - mu_zero| < 1) or
  // one amplitude vanishes; population and classifier results are then
  // unreliable.
  bool resolved = true;
};

struct MixtureOptions {
  int max_iterations = 500;
  double rel_ll_tol = 1e-10;
};

// Maximum-likelihood EM fit. hist[k] = number of shots with k counts;
// total shots must be >= 100.
PoissonMixture fit_poisson_mixture(const std::vector<std::uint64_t>& hist,
                                   const MixtureOptions& options = {});

// P(NV-) = A_minus / (A_minus + A_zero).
double population_from_mixture(const PoissonMixture& m);

struct ThresholdClassifier {
  // Counts strictly above the threshold classify as Negative (bright).
  std::int64_t threshold = 0;
  double fidelity_minus = 0.0;  // P(classified Negative | Negative)
  double fidelity_zero = 0.0;   // P(classified Neutral | Neutral)

  ChargeState classify(std::uint32_t counts) const {
    return static_cast<std::int64_t>(counts) > threshold
               ? ChargeState::Negative
               : ChargeState::Neutral;
  }
};

// Integer threshold minimizing the total misclassification probability under
// the fitted mixture and its amplitude prior. Throws FitError on an
// unresolved mixture.
ThresholdClassifier make_threshold_classifier(const PoissonMixture& m);

// Total misclassification probability of `threshold` under the mixture;
// exposed so an exhaustive scan can serve as an oracle.
double classifier_error_probability(const PoissonMixture& m,
                                    std::int64_t threshold);

}  // namespace nvpd
