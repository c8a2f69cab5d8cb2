#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qme {

enum class Interaction { Simultaneous, Sequential };

/// Units: hbar = 1, qubit-oscillator coupling = 1, temperature in units of
/// omega/k_B, time in inverse coupling.
struct SystemParams {
  double kappa = 0.0;        // oscillator damping rate
  double gamma = 0.0;        // qubit dephasing rate
  double temperature = 0.0;  // omega / k_B units
  Interaction interaction = Interaction::Simultaneous;

  void validate() const {
    if (!(kappa >= 0.0) || !(gamma >= 0.0) || !(temperature >= 0.0))
      throw std::invalid_argument("kappa, gamma and temperature must be non-negative");
  }
};

/// Bose occupation 1/(exp(1/T) - 1); zero at T = 0.
inline double thermal_occupation(double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = 1.0 / temperature;
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

/// Thermal Wigner width n(T) + 1/2.
inline double thermal_delta(double temperature) { return thermal_occupation(temperature) + 0.5; }

inline double delta_of(const SystemParams& p) { return thermal_delta(p.temperature); }

/// Damping rate seen by each oscillator in the entangling stage. The
/// sequential protocol is approximated by doubling kappa.
inline double entangling_kappa(const SystemParams& p) {
  return p.interaction == Interaction::Sequential ? 2.0 * p.kappa : p.kappa;
}

/// Inverse of thermal_occupation.
inline double temperature_for_occupation(double n) {
  if (n <= 0.0) return 0.0;
  return 1.0 / std::log1p(1.0 / n);
}

inline std::string to_string(Interaction i) { return i == Interaction::Sequential ? "seq" : "sim"; }

inline Interaction interaction_from_string(const std::string& s) {
  if (s == "sim" || s == "simultaneous") return Interaction::Simultaneous;
  if (s == "seq" || s == "sequential") return Interaction::Sequential;
  throw std::invalid_argument("unknown interaction mode '" + s + "'");
}

}  // namespace qme
