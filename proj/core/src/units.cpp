#include "nvpd/units.hpp"

#include <stdexcept>

namespace nvpd {

const char* to_token(ChargeState s) {
  return s == ChargeState::Negative ? "NV-" : "NV0";
}

ChargeState charge_state_from_token(const std::string& token) {
  if (token == "NV-") return ChargeState::Negative;
  if (token == "NV0") return ChargeState::Neutral;
  throw std::invalid_argument("unknown charge-state token: " + token);
}

Wavelength::Wavelength(double value_nm) : nm(value_nm) {
  if (!(nm > 0.0)) throw std::domain_error("wavelength must be positive");
}

PhotonEnergy::PhotonEnergy(double value_ev) : ev(value_ev) {
  if (!(ev > 0.0)) throw std::domain_error("photon energy must be positive");
}

Power::Power(double value_uw) : uw(value_uw) {
  if (!(uw >= 0.0)) throw std::domain_error("power must be non-negative");
}

PhotonEnergy wavelength_to_energy(Wavelength w) {
  return PhotonEnergy(kHcEvNm / w.nm);
}

Wavelength energy_to_wavelength(PhotonEnergy e) {
  return Wavelength(kHcEvNm / e.ev);
}

}  // namespace nvpd
