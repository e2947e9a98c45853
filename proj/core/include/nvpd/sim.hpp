#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvpd/kinetics.hpp"
#include "nvpd/rng.hpp"
#include "nvpd/units.hpp"

// Seeded stochastic simulation of photon-counting experiments on a two-state
// emitter: telegraph fluorescence traces, single-shot detection histograms,
// and correlated before/pulse/after shot sequences.
//
// The hidden state follows an exact continuous-time Markov jump process
// (exponential waiting times); per-interval photon counts are Poisson with
// the time-weighted mean intensity, so mid-interval jumps are handled exactly.

namespace nvpd {

// Fluorescence levels of the two charge states plus the counting bin width.
struct EmissionModel {
  double fl_minus;  // counts/ms, bright state
  double fl_zero;   // counts/ms, dark state
  double bin_ms;

  EmissionModel(double fl_minus_per_ms, double fl_zero_per_ms, double bin_ms);

  double rate(ChargeState s) const {
    return s == ChargeState::Negative ? fl_minus : fl_zero;
  }
};

struct PhotonTrace {
  double bin_ms = 1.0;
  std::vector<std::uint32_t> counts;
  // Majority-occupancy state per bin; present only for synthetic traces.
  std::vector<ChargeState> true_path;

  bool has_truth() const { return !true_path.empty(); }
  double duration_ms() const { return bin_ms * counts.size(); }
};

struct Pulse {
  double wavelength_nm;
  double power_uw;
  double duration_ms;
};

// init populates the steady state, probe drives the dynamics under study,
// detect is the counting pulse.
struct PulseSequence {
  Pulse init;
  Pulse probe;
  Pulse detect;
};

// Charge-state transition rates during each pulse of the sequence.
struct PulseRates {
  TwoStateRates init;
  TwoStateRates probe;
  TwoStateRates detect;
};

struct ShotRecord {
  std::uint32_t pre_counts = 0;
  std::uint32_t post_counts = 0;
  // States at the start of the respective detection pulses.
  ChargeState true_pre = ChargeState::Negative;
  ChargeState true_post = ChargeState::Negative;
};

struct DetectionShot {
  std::uint32_t counts = 0;
  ChargeState true_state = ChargeState::Negative;  // state entering readout
};

// Waiting time before leaving `s`; infinite when the exit rate is zero.
double sample_dwell_ms(Rng& rng, const TwoStateRates& r, ChargeState s);

// Advances `state` over duration_ms and returns the occupancy times
// (minus_ms, zero_ms). Re-drawing the dwell at segment boundaries is valid
// because exponential waiting times are memoryless.
std::pair<double, double> evolve_occupancy(Rng& rng, const TwoStateRates& r,
                                           ChargeState& state,
                                           double duration_ms);

// Telegraph fluorescence trace under continuous illumination. The initial
// state defaults to a draw from the steady state (Negative if both rates
// vanish). Deterministic for a fixed seed.
PhotonTrace simulate_trace(const TwoStateRates& r, const EmissionModel& em,
                           double duration_ms, std::uint64_t seed,
                           std::optional<ChargeState> initial = {});

// One readout per shot: initial state ~ Bernoulli(p_minus), evolved under
// r_during_readout while counting. Shots use independent derived streams.
std::vector<DetectionShot> simulate_detection_shots(
    double p_minus, const EmissionModel& em,
    const TwoStateRates& r_during_readout, double readout_ms, int shots,
    std::uint64_t seed);

// Histogram[k] = number of shots with k counts.
std::vector<std::uint64_t> simulate_detection_histogram(
    double p_minus, const EmissionModel& em,
    const TwoStateRates& r_during_readout, double readout_ms, int shots,
    std::uint64_t seed);

std::vector<std::uint64_t> histogram_from_shots(
    const std::vector<DetectionShot>& shots);

struct CorrelatedRun {
  std::vector<ShotRecord> records;
  std::vector<std::string> warnings;
};

// Correlated charge-state measurement: readout, probe pulse, readout.
// Each shot is independent; the state entering the init pulse is drawn from
// the detect-pulse steady state (the distribution a preceding long readout
// would leave behind), then evolved under the init rates for the init
// duration. Fluorescence is only counted during detect pulses.
CorrelatedRun simulate_correlated_experiment(const PulseSequence& seq,
                                             const PulseRates& rates,
                                             const EmissionModel& em,
                                             int shots, std::uint64_t seed);

}  // namespace nvpd
