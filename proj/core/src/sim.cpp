#include "nvpd/sim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nvpd {

EmissionModel::EmissionModel(double fl_minus_per_ms, double fl_zero_per_ms,
                             double bin_width_ms)
    : fl_minus(fl_minus_per_ms), fl_zero(fl_zero_per_ms), bin_ms(bin_width_ms) {
  if (!(fl_zero >= 0.0) || !(fl_minus > fl_zero))
    throw std::domain_error("emission model requires fl_minus > fl_zero >= 0");
  if (!(bin_ms > 0.0)) throw std::domain_error("bin width must be positive");
}

double sample_dwell_ms(Rng& rng, const TwoStateRates& r, ChargeState s) {
  const double rate = r.leave_rate(s);
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return rng.exponential(rate);
}

std::pair<double, double> evolve_occupancy(Rng& rng, const TwoStateRates& r,
                                           ChargeState& state,
                                           double duration_ms) {
  double occ[2] = {0.0, 0.0};
  double t = 0.0;
  while (t < duration_ms) {
    const double remaining = duration_ms - t;
    const double dwell = sample_dwell_ms(rng, r, state);
    if (dwell < remaining) {
      occ[state == ChargeState::Negative ? 0 : 1] += dwell;
      t += dwell;
      state = other(state);
    } else {
      occ[state == ChargeState::Negative ? 0 : 1] += remaining;
      break;
    }
  }
  return {occ[0], occ[1]};
}

static ChargeState draw_initial(Rng& rng, const TwoStateRates& r,
                                std::optional<ChargeState> initial) {
  if (initial) return *initial;
  if (r.total() > 0.0) {
    return rng.bernoulli(steady_state(r).p_minus) ? ChargeState::Negative
                                                  : ChargeState::Neutral;
  }
  return ChargeState::Negative;
}

PhotonTrace simulate_trace(const TwoStateRates& r, const EmissionModel& em,
                           double duration_ms, std::uint64_t seed,
                           std::optional<ChargeState> initial) {
  if (!(duration_ms >= em.bin_ms))
    throw std::domain_error("trace must span at least one bin");
  const auto n_bins =
      static_cast<std::size_t>(std::floor(duration_ms / em.bin_ms + 1e-9));

  Rng rng = derived_rng(seed, stream::kTrace, 0);
  ChargeState state = draw_initial(rng, r, initial);

  PhotonTrace trace;
  trace.bin_ms = em.bin_ms;
  trace.counts.reserve(n_bins);
  trace.true_path.reserve(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const ChargeState bin_start = state;
    const auto [t_minus, t_zero] = evolve_occupancy(rng, r, state, em.bin_ms);
    const double mean = em.fl_minus * t_minus + em.fl_zero * t_zero;
    trace.counts.push_back(rng.poisson(mean));
    // Majority occupancy; ties go to the bin-start state.
    ChargeState majority = bin_start;
    if (t_minus > t_zero)
      majority = ChargeState::Negative;
    else if (t_zero > t_minus)
      majority = ChargeState::Neutral;
    trace.true_path.push_back(majority);
  }
  return trace;
}

std::vector<DetectionShot> simulate_detection_shots(
    double p_minus, const EmissionModel& em,
    const TwoStateRates& r_during_readout, double readout_ms, int shots,
    std::uint64_t seed) {
  if (shots < 1) throw std::domain_error("need at least one shot");
  if (!(p_minus >= 0.0 && p_minus <= 1.0))
    throw std::domain_error("p_minus must lie in [0, 1]");
  if (!(readout_ms > 0.0))
    throw std::domain_error("readout duration must be positive");

  std::vector<DetectionShot> out(static_cast<std::size_t>(shots));
  for (int i = 0; i < shots; ++i) {
    Rng rng = derived_rng(seed, stream::kDetectionShot,
                          static_cast<std::uint64_t>(i));
    ChargeState state = rng.bernoulli(p_minus) ? ChargeState::Negative
                                               : ChargeState::Neutral;
    out[i].true_state = state;
    const auto [t_minus, t_zero] =
        evolve_occupancy(rng, r_during_readout, state, readout_ms);
    out[i].counts = rng.poisson(em.fl_minus * t_minus + em.fl_zero * t_zero);
  }
  return out;
}

std::vector<std::uint64_t> histogram_from_shots(
    const std::vector<DetectionShot>& shots) {
  std::vector<std::uint64_t> hist;
  for (const auto& s : shots) {
    if (s.counts >= hist.size()) hist.resize(s.counts + 1, 0);
    ++hist[s.counts];
  }
  return hist;
}

std::vector<std::uint64_t> simulate_detection_histogram(
    double p_minus, const EmissionModel& em,
    const TwoStateRates& r_during_readout, double readout_ms, int shots,
    std::uint64_t seed) {
  return histogram_from_shots(simulate_detection_shots(
      p_minus, em, r_during_readout, readout_ms, shots, seed));
}

CorrelatedRun simulate_correlated_experiment(const PulseSequence& seq,
                                             const PulseRates& rates,
                                             const EmissionModel& em,
                                             int shots, std::uint64_t seed) {
  if (shots < 1) throw std::domain_error("need at least one shot");
  if (!(seq.detect.duration_ms > 0.0))
    throw std::domain_error("detect pulse must have positive duration");
  if (!(seq.init.duration_ms >= 0.0) || !(seq.probe.duration_ms >= 0.0))
    throw std::domain_error("pulse durations must be non-negative");

  CorrelatedRun run;

  const double separation =
      (em.fl_minus - em.fl_zero) * seq.detect.duration_ms;
  const double bright_mean = em.fl_minus * seq.detect.duration_ms;
  if (separation <= 5.0 * std::sqrt(bright_mean))
    run.warnings.push_back(
        "detect pulse too short: expected count separation does not exceed "
        "5 sqrt(mean)");
  if (rates.init.total() > 0.0 &&
      seq.init.duration_ms * rates.init.total() < 5.0)
    run.warnings.push_back(
        "init pulse shorter than ~5 relaxation times; shots start away from "
        "the init-pulse steady state");

  // Distribution entering the init pulse: what a long preceding readout
  // leaves behind.
  const double p_pre = rates.detect.total() > 0.0
                           ? steady_state(rates.detect).p_minus
                           : 0.5;

  run.records.resize(static_cast<std::size_t>(shots));
  for (int i = 0; i < shots; ++i) {
    Rng rng = derived_rng(seed, stream::kCorrelatedShot,
                          static_cast<std::uint64_t>(i));
    ChargeState state = rng.bernoulli(p_pre) ? ChargeState::Negative
                                             : ChargeState::Neutral;
    evolve_occupancy(rng, rates.init, state, seq.init.duration_ms);

    ShotRecord& rec = run.records[i];
    rec.true_pre = state;
    {
      const auto [t_minus, t_zero] =
          evolve_occupancy(rng, rates.detect, state, seq.detect.duration_ms);
      rec.pre_counts = rng.poisson(em.fl_minus * t_minus + em.fl_zero * t_zero);
    }
    evolve_occupancy(rng, rates.probe, state, seq.probe.duration_ms);
    rec.true_post = state;
    {
      const auto [t_minus, t_zero] =
          evolve_occupancy(rng, rates.detect, state, seq.detect.duration_ms);
      rec.post_counts =
          rng.poisson(em.fl_minus * t_minus + em.fl_zero * t_zero);
    }
  }
  return run;
}

}  // namespace nvpd
