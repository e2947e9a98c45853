#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "nvpd/kinetics.hpp"
#include "nvpd/rng.hpp"

using namespace nvpd;

namespace {

// Independent oracle: full eigen-decomposition of the 2x2 generator.
ChargeDistribution evolve_by_diagonalization(const TwoStateRates& r,
                                             const ChargeDistribution& p0,
                                             double t) {
  Eigen::Matrix2d a;
  a << -r.ionization, r.recombination, r.ionization, -r.recombination;
  const Eigen::EigenSolver<Eigen::Matrix2d> es(a);
  const Eigen::Matrix2cd v = es.eigenvectors();
  const Eigen::Vector2cd lam = es.eigenvalues();
  const Eigen::Vector2cd coeff =
      v.inverse() * Eigen::Vector2cd(p0.p_minus, p0.p_zero);
  const Eigen::Vector2cd pt =
      v * (lam.array() * t).exp().matrix().asDiagonal() * coeff;
  return ChargeDistribution(pt(0).real(), pt(1).real());
}

// Steady state of the four-level model straight from its closed form:
// p_E = p_S I/(I + I_S).
double p_e_closed_form(const FourLevelParams& fp, double intensity) {
  const double branching = fp.lambda_em / fp.lambda_mg;
  double p_s_inv = 1.0 + branching;
  double i_s_num = fp.lambda_eg + fp.lambda_em;
  double i_s_den = fp.sigma * (1.0 + branching);
  if (fp.sigma_ion > 0.0) {
    p_s_inv += fp.sigma_ion / fp.sigma_re + fp.sigma_ion / fp.sigma;
    i_s_num += fp.i0 * fp.sigma * fp.sigma_ion / fp.sigma_re;
    i_s_den += fp.sigma_ion + fp.sigma * fp.sigma_ion / fp.sigma_re;
  }
  const double p_s = 1.0 / p_s_inv;
  const double i_s = i_s_num / i_s_den;
  return p_s * intensity / (intensity + i_s);
}

FourLevelParams random_four_level(Rng& rng) {
  auto span = [&](double lo, double hi) {
    return lo * std::pow(hi / lo, rng.uniform());
  };
  return FourLevelParams(span(1e-3, 1e-1), span(1e-4, 1e-2), span(1e-4, 1e-2),
                         span(1e3, 1e5), span(1e1, 1e3), span(1e0, 1e2),
                         span(1e1, 1e3));
}

}  // namespace

TEST_CASE("steady state follows the lifetime ratio") {
  const TwoStateRates r = TwoStateRates::from_lifetimes(56.6, 465.0);
  CHECK(steady_state(r).p_minus ==
        doctest::Approx(56.6 / 521.6).epsilon(1e-12));
  CHECK(steady_state(TwoStateRates(0.3, 0.3)).p_minus == doctest::Approx(0.5));
  CHECK(steady_state(TwoStateRates(0.0, 0.2)).p_minus == doctest::Approx(1.0));
  CHECK_THROWS_AS(steady_state(TwoStateRates(0.0, 0.0)), std::domain_error);
}

TEST_CASE("evolve: boundary conditions and the diagonalization oracle") {
  const ChargeDistribution p0(0.3, 0.7);

  SUBCASE("t = 0 is the identity") {
    const auto p = evolve(TwoStateRates(0.4, 0.1), p0, 0.0);
    CHECK(p.p_minus == p0.p_minus);
    CHECK(p.p_zero == p0.p_zero);
  }

  SUBCASE("long times reach the steady state") {
    const TwoStateRates r(0.01, 0.02);
    const auto p = evolve(r, p0, 1e6 / r.total());
    CHECK(std::fabs(p.p_minus - steady_state(r).p_minus) < 1e-12);
  }

  SUBCASE("frozen chain") {
    const auto p = evolve(TwoStateRates(0.0, 0.0), p0, 123.0);
    CHECK(p.p_minus == p0.p_minus);
  }

  SUBCASE("negative time is rejected") {
    CHECK_THROWS_AS(evolve(TwoStateRates(0.1, 0.1), p0, -1.0),
                    std::domain_error);
  }

  SUBCASE("quoted point matches the oracle") {
    const TwoStateRates r(0.01, 0.02);
    const auto got = evolve(r, ChargeDistribution::pure(ChargeState::Negative),
                            50.0);
    const auto want = evolve_by_diagonalization(
        r, ChargeDistribution::pure(ChargeState::Negative), 50.0);
    CHECK(std::fabs(got.p_minus - want.p_minus) < 1e-12);
    CHECK(std::fabs(got.p_zero - want.p_zero) < 1e-12);
  }

  SUBCASE("1000 random draws agree to 1e-12 absolute") {
    Rng rng(42);
    for (int i = 0; i < 1000; ++i) {
      const TwoStateRates r(0.5 * rng.uniform(), 0.5 * rng.uniform());
      const double pm = rng.uniform();
      const ChargeDistribution p(pm, 1.0 - pm);
      const double t = 200.0 * rng.uniform();
      const auto got = evolve(r, p, t);
      const auto want = evolve_by_diagonalization(r, p, t);
      CHECK(std::fabs(got.p_minus - want.p_minus) < 1e-12);
      CHECK(std::fabs(got.p_zero - want.p_zero) < 1e-12);
      CHECK(std::fabs(got.p_minus + got.p_zero - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("both branch forms of the closed-form evolution") {
  // Starting from NV-: p(t) = p_inf - (ion/tot) e^(-tot t) (-1, 1);
  // starting from NV0: p(t) = p_inf + (rec/tot) e^(-tot t) (-1, 1).
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const TwoStateRates r(0.05 + 0.5 * rng.uniform(),
                          0.05 + 0.5 * rng.uniform());
    const double t = 30.0 * rng.uniform();
    const double tot = r.total();
    const double decay = std::exp(-tot * t);
    const auto from_minus =
        evolve(r, ChargeDistribution::pure(ChargeState::Negative), t);
    CHECK(from_minus.p_minus ==
          doctest::Approx(r.recombination / tot + r.ionization / tot * decay)
              .epsilon(1e-12));
    const auto from_zero =
        evolve(r, ChargeDistribution::pure(ChargeState::Neutral), t);
    CHECK(from_zero.p_minus ==
          doctest::Approx(r.recombination / tot * (1.0 - decay))
              .epsilon(1e-12));
  }
}

TEST_CASE("flip probability") {
  const TwoStateRates r(0.01, 0.01);
  CHECK(flip_probability(r, ChargeState::Negative, 0.0) == 0.0);
  CHECK(flip_probability(r, ChargeState::Negative, std::log(2.0) / 0.02) ==
        doctest::Approx(0.25).epsilon(1e-12));

  const TwoStateRates r2(0.03, 0.01);
  CHECK(flip_probability(r2, ChargeState::Negative, 1e9) ==
        doctest::Approx(r2.ionization / r2.total()).epsilon(1e-12));

  SUBCASE("consistent with evolve from a pure state") {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
      const TwoStateRates rr(0.2 * rng.uniform(), 0.2 * rng.uniform());
      const double t = 100.0 * rng.uniform();
      const auto from_minus =
          evolve(rr, ChargeDistribution::pure(ChargeState::Negative), t);
      CHECK(flip_probability(rr, ChargeState::Negative, t) ==
            doctest::Approx(from_minus.p_zero).epsilon(1e-12));
      const auto from_zero =
          evolve(rr, ChargeDistribution::pure(ChargeState::Neutral), t);
      CHECK(flip_probability(rr, ChargeState::Neutral, t) ==
            doctest::Approx(from_zero.p_minus).epsilon(1e-12));
    }
  }

  SUBCASE("non-decreasing in t") {
    Rng rng(12);
    const TwoStateRates rr(0.07, 0.025);
    double prev = -1.0;
    for (double t = 0.0; t <= 200.0; t += 0.5) {
      const double f = flip_probability(rr, ChargeState::Negative, t);
      CHECK(f >= prev);
      prev = f;
    }
  }
}

TEST_CASE("rates_from_flip_fit") {
  const auto r = rates_from_flip_fit(0.5, 0.02);
  CHECK(r.ionization == doctest::Approx(0.01));
  CHECK(r.recombination == doctest::Approx(0.01));

  const auto r2 = rates_from_flip_fit(0.62, 0.5);
  CHECK(r2.ionization == doctest::Approx(0.31).epsilon(1e-12));
  CHECK(r2.recombination == doctest::Approx(0.19).epsilon(1e-12));

  SUBCASE("round-trips through the asymptote parametrization") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
      const TwoStateRates rr(rng.uniform(), rng.uniform());
      if (rr.total() == 0.0) continue;
      const auto back =
          rates_from_flip_fit(rr.ionization / rr.total(), rr.total());
      CHECK(back.ionization == doctest::Approx(rr.ionization).epsilon(1e-12));
      CHECK(back.recombination ==
            doctest::Approx(rr.recombination).epsilon(1e-12));
    }
  }

  CHECK_THROWS_AS(rates_from_flip_fit(1.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(rates_from_flip_fit(0.5, 0.0), std::domain_error);
}

TEST_CASE("power-law rates") {
  const PowerLawRate ion{0.001, 0.0005};
  CHECK(ion.at(Power(2.0)) == doctest::Approx(0.004).epsilon(1e-12));

  const auto zero = power_scaled_rates(ion, PowerLawRate{0.1, 0.2}, Power(0.0));
  CHECK(zero.ionization == 0.0);
  CHECK(zero.recombination == 0.0);

  SUBCASE("pure quadratic scales by 4 when power doubles") {
    const PowerLawRate q{0.0, 0.03};
    CHECK(q.at(Power(2.0)) == doctest::Approx(4.0 * q.at(Power(1.0))));
  }

  SUBCASE("pure quadratic rates give a power-independent steady state") {
    const PowerLawRate qi{0.0, 0.0177};
    const PowerLawRate qr{0.0, 0.00215};
    const double ref =
        steady_state(power_scaled_rates(qi, qr, Power(1.0))).p_minus;
    for (double p = 0.5; p <= 6.0; p += 0.25) {
      const double pm =
          steady_state(power_scaled_rates(qi, qr, Power(p))).p_minus;
      CHECK(std::fabs(pm - ref) < 1e-12);
    }
  }

  SUBCASE("clamped reporting keeps raw values") {
    const PowerLawRate noisy{-1e-5, 0.02};
    CHECK(noisy.a_clamped() == 0.0);
    CHECK(noisy.a == -1e-5);
  }
}

TEST_CASE("four-level steady state") {
  SUBCASE("dark steady state is degenerate and all-ground") {
    const FourLevelParams fp(0.01, 0.001, 0.002, 1e4, 100.0, 10.0, 50.0);
    const auto s = four_level_steady_state(fp, Power(0.0));
    CHECK(s.degenerate);
    CHECK(s.p_g == 1.0);
    CHECK(s.p_e == 0.0);
  }

  SUBCASE("sigma_ion = 0 reduces to the three-level closed form") {
    Rng rng(99);
    for (int i = 0; i < 100; ++i) {
      FourLevelParams fp = random_four_level(rng);
      const FourLevelParams three(fp.sigma, 0.0, fp.sigma_re, fp.lambda_eg,
                                  fp.lambda_em, fp.lambda_mg, fp.i0);
      const double intensity = 1.0 + 1e4 * rng.uniform();
      const auto s = four_level_steady_state(three, Power(intensity));
      const double want = p_e_closed_form(three, intensity);
      CHECK(std::fabs(s.p_e - want) <= 1e-10 * want);
      CHECK(s.p_0 == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("generic parameters match the closed form to 1e-10 relative") {
    Rng rng(100);
    for (int i = 0; i < 100; ++i) {
      const FourLevelParams fp = random_four_level(rng);
      const double intensity = 1.0 + 1e4 * rng.uniform();
      const auto s = four_level_steady_state(fp, Power(intensity));
      const double want = p_e_closed_form(fp, intensity);
      CHECK(std::fabs(s.p_e - want) <= 1e-10 * want);
      CHECK(std::fabs(s.sum() - 1.0) < 1e-12);
      CHECK(s.p_g >= 0.0);
      CHECK(s.p_e >= 0.0);
      CHECK(s.p_m >= 0.0);
      CHECK(s.p_0 >= 0.0);
    }
  }
}

TEST_CASE("saturation curve") {
  const FourLevelParams fp(0.02, 0.0, 0.001, 1e4, 200.0, 20.0, 100.0);
  const double branching = fp.lambda_em / fp.lambda_mg;
  const double i_s =
      (fp.lambda_eg + fp.lambda_em) / (fp.sigma * (1.0 + branching));

  const auto curve = saturation_curve(fp, {0.0, i_s});
  CHECK(curve[0].second == 0.0);

  // At I = I_S the fluorescence is half of the saturation value.
  const double f_at_is = curve[1].second;
  const double f_sat = fp.lambda_eg / (1.0 + branching);
  CHECK(f_at_is == doctest::Approx(0.5 * f_sat).epsilon(1e-9));

  CHECK_THROWS_AS(saturation_curve(fp, {}), std::domain_error);
}
