#pragma once

#include <string>

// Domain value types and unit conventions used throughout the library.
//
// Units are fixed repo-wide: time in ms, rates in ms^-1, optical power in
// uW, photon energy in eV, fluorescence in counts/ms.

namespace nvpd {

// The two stable charge states of the defect. Negative is the bright state
// under red-filtered detection, Neutral is dark.
enum class ChargeState { Negative, Neutral };

constexpr ChargeState other(ChargeState s) {
  return s == ChargeState::Negative ? ChargeState::Neutral
                                    : ChargeState::Negative;
}

// Short tokens used in CSV files: "NV-" / "NV0".
const char* to_token(ChargeState s);
ChargeState charge_state_from_token(const std::string& token);

// hc in eV*nm (CODATA). More digits than physically meaningful so that
// conversions are bit-stable in tests.
inline constexpr double kHcEvNm = 1239.8419843320026;

struct Wavelength {
  double nm;
  explicit Wavelength(double value_nm);
};

struct PhotonEnergy {
  double ev;
  explicit PhotonEnergy(double value_ev);
};

struct Power {
  double uw;
  explicit Power(double value_uw);
};

PhotonEnergy wavelength_to_energy(Wavelength w);
Wavelength energy_to_wavelength(PhotonEnergy e);

}  // namespace nvpd
