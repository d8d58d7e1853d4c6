#pragma once

// Piezoelectric cantilever surrogate: DC gains plus a modal-superposition
// frequency response standing in for a finite-element model.

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strainsim/crystal_frames.hpp"

namespace strainsim::actuator {

/// Single damped mode. `strain_gain_per_v` is the quasi-static (omega -> 0)
/// contribution of this mode; on resonance it is amplified by the quality factor.
struct MechanicalMode {
  double frequency_hz = 0.0;
  double quality_factor = 1.0;
  double strain_gain_per_v = 0.0;

  /// H(f) = f_m^2 / (f_m^2 - f^2 + i f f_m / Q); H(0) = 1, |H(f_m)| = Q.
  std::complex<double> transfer(double drive_hz) const;

  bool operator==(const MechanicalMode&) const = default;
};

struct SiteResponse {
  double dc_strain_gain_per_v = 0.0;
  std::vector<MechanicalMode> modes;

  bool operator==(const SiteResponse&) const = default;
};

struct ActuatorModel {
  double dc_deflection_gain_nm_per_v = 0.0;
  std::map<std::string, SiteResponse, std::less<>> sites;
  double capacitance_f = 1e-12;
  double loss_factor = 6.4e-4;
  double leak_resistance_ohm = 3.6e12;
  double max_voltage_v = 100.0;

  /// Throws ParameterError on capacitance <= 0, loss_factor outside (0, 1),
  /// non-finite gains, or a modal sum that disagrees with the DC gain by > 0.1%.
  void validate() const;

  const SiteResponse& site(std::string_view id) const;

  bool operator==(const ActuatorModel&) const = default;
};

struct DriveSignal {
  double v_dc = 0.0;
  double v_ac = 0.0;
  double omega_d_hz = 0.0;
  std::optional<double> duration_s;

  /// Rectangular envelope: 1 inside [0, duration), 0 elsewhere; always 1 without a duration.
  double envelope(double t_s) const;
};

struct DcResponse {
  double deflection_nm = 0.0;
  crystal::StrainTensor strain;  // device frame
};

DcResponse dc_response(const ActuatorModel& model, std::string_view site, double v_dc,
                       double poisson_ratio = 0.0);

/// v_ac * |sum_m gain_m H_m(omega_d)|; falls back to the DC gain for sites without modes.
double ac_strain_amplitude(const ActuatorModel& model, std::string_view site, double v_ac, double omega_d_hz);

/// loss_factor * C * v_ac^2 * f.
double dissipated_power_w(const ActuatorModel& model, double v_ac, double omega_d_hz);

/// Energy for one -V_AC -> +V_AC traversal: loss_factor * C * v_ac^2.
double switching_energy_j(const ActuatorModel& model, double v_ac);

/// Ohmic leakage v_dc^2 / R_leak.
double hold_power_w(const ActuatorModel& model, double v_dc);

}  // namespace strainsim::actuator
