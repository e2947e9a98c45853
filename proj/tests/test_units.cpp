#include <doctest.h>

#include "nvpd/rng.hpp"
#include "nvpd/units.hpp"

using namespace nvpd;

TEST_CASE("energy-wavelength conversion hits the defining constant") {
  CHECK(wavelength_to_energy(Wavelength(1239.8419843320026)).ev ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(wavelength_to_energy(Wavelength(532.0)).ev ==
        doctest::Approx(2.33053).epsilon(1e-5));
}

TEST_CASE("conversion round-trips to 1e-12 relative over 400-800 nm") {
  Rng rng(20240811);
  for (int i = 0; i < 1000; ++i) {
    const double nm = 400.0 + 400.0 * rng.uniform();
    const Wavelength back =
        energy_to_wavelength(wavelength_to_energy(Wavelength(nm)));
    CHECK(std::fabs(back.nm - nm) <= 1e-12 * nm);
  }
  // and the quoted pair
  const PhotonEnergy e = wavelength_to_energy(Wavelength(477.0));
  CHECK(e.ev == doctest::Approx(2.5992).epsilon(1e-4));
  CHECK(energy_to_wavelength(e).nm == doctest::Approx(477.0).epsilon(1e-13));
}

TEST_CASE("wavelength_to_energy is strictly decreasing") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double w1 = 400.0 + 400.0 * rng.uniform();
    const double w2 = w1 + 1e-6 + 100.0 * rng.uniform();
    CHECK(wavelength_to_energy(Wavelength(w1)).ev >
          wavelength_to_energy(Wavelength(w2)).ev);
  }
}

TEST_CASE("non-positive inputs are rejected") {
  CHECK_THROWS_AS(Wavelength(0.0), std::domain_error);
  CHECK_THROWS_AS(Wavelength(-5.0), std::domain_error);
  CHECK_THROWS_AS(PhotonEnergy(0.0), std::domain_error);
  CHECK_THROWS_AS(Power(-1.0), std::domain_error);
  CHECK(Power(0.0).uw == 0.0);
}

TEST_CASE("charge state tokens round-trip") {
  CHECK(charge_state_from_token(to_token(ChargeState::Negative)) ==
        ChargeState::Negative);
  CHECK(charge_state_from_token(to_token(ChargeState::Neutral)) ==
        ChargeState::Neutral);
  CHECK(other(ChargeState::Negative) == ChargeState::Neutral);
  CHECK_THROWS(charge_state_from_token("NV+"));
}
