#include "strainsim/nems_actuator.hpp"

#include <cmath>

#include "strainsim/errors.hpp"

namespace strainsim::actuator {

namespace {

constexpr double kModalSumTolerance = 1e-3;

}  // namespace

std::complex<double> MechanicalMode::transfer(double drive_hz) const {
  const double fm2 = frequency_hz * frequency_hz;
  const std::complex<double> denom(fm2 - drive_hz * drive_hz, drive_hz * frequency_hz / quality_factor);
  return fm2 / denom;
}

void ActuatorModel::validate() const {
  if (!(capacitance_f > 0.0) || !std::isfinite(capacitance_f)) throw ParameterError("capacitance must be positive");
  if (!(loss_factor > 0.0 && loss_factor < 1.0)) throw ParameterError("loss factor must lie in (0, 1)");
  if (!(leak_resistance_ohm > 0.0)) throw ParameterError("leak resistance must be positive");
  if (!(max_voltage_v > 0.0)) throw ParameterError("voltage bound must be positive");
  if (!std::isfinite(dc_deflection_gain_nm_per_v)) throw ParameterError("deflection gain must be finite");
  for (const auto& [id, s] : sites) {
    if (!std::isfinite(s.dc_strain_gain_per_v)) throw ParameterError("site " + id + ": DC strain gain must be finite");
    if (s.modes.empty()) continue;
    double modal_sum = 0.0;
    for (const auto& m : s.modes) {
      if (!(m.frequency_hz > 0.0)) throw ParameterError("site " + id + ": mode frequency must be positive");
      if (!(m.quality_factor >= 1.0)) throw ParameterError("site " + id + ": quality factor must be >= 1");
      if (!std::isfinite(m.strain_gain_per_v)) throw ParameterError("site " + id + ": modal gain must be finite");
      modal_sum += m.strain_gain_per_v;
    }
    const double scale = std::max(std::abs(s.dc_strain_gain_per_v), 1e-300);
    if (std::abs(modal_sum - s.dc_strain_gain_per_v) > kModalSumTolerance * scale) {
      throw ParameterError("site " + id + ": modal gains sum to " + std::to_string(modal_sum) +
                           " but the DC gain is " + std::to_string(s.dc_strain_gain_per_v));
    }
  }
}

const SiteResponse& ActuatorModel::site(std::string_view id) const {
  const auto it = sites.find(id);
  if (it == sites.end()) throw SiteNotFoundError("no emitter site '" + std::string(id) + "' on this actuator");
  return it->second;
}

double DriveSignal::envelope(double t_s) const {
  if (!duration_s) return 1.0;
  return (t_s >= 0.0 && t_s < *duration_s) ? 1.0 : 0.0;
}

DcResponse dc_response(const ActuatorModel& model, std::string_view site, double v_dc, double poisson_ratio) {
  const SiteResponse& s = model.site(site);
  if (!(std::abs(v_dc) <= model.max_voltage_v)) {
    throw VoltageRangeError("|V_DC| = " + std::to_string(std::abs(v_dc)) + " V exceeds the " +
                            std::to_string(model.max_voltage_v) + " V bound");
  }
  return {model.dc_deflection_gain_nm_per_v * v_dc,
          crystal::uniaxial_device_strain(s.dc_strain_gain_per_v * v_dc, poisson_ratio)};
}

double ac_strain_amplitude(const ActuatorModel& model, std::string_view site, double v_ac, double omega_d_hz) {
  if (!(omega_d_hz >= 0.0)) throw ParameterError("drive frequency must be non-negative");
  if (!(v_ac >= 0.0)) throw ParameterError("V_AC must be non-negative");
  const SiteResponse& s = model.site(site);
  if (s.modes.empty()) return v_ac * std::abs(s.dc_strain_gain_per_v);
  std::complex<double> total{0.0, 0.0};
  for (const auto& m : s.modes) total += m.strain_gain_per_v * m.transfer(omega_d_hz);
  return v_ac * std::abs(total);
}

double dissipated_power_w(const ActuatorModel& model, double v_ac, double omega_d_hz) {
  if (!(omega_d_hz >= 0.0)) throw ParameterError("drive frequency must be non-negative");
  return switching_energy_j(model, v_ac) * omega_d_hz;
}

double switching_energy_j(const ActuatorModel& model, double v_ac) {
  if (!(v_ac >= 0.0)) throw ParameterError("V_AC must be non-negative");
  return model.loss_factor * model.capacitance_f * v_ac * v_ac;
}

double hold_power_w(const ActuatorModel& model, double v_dc) {
  return v_dc * v_dc / model.leak_resistance_ohm;
}

}  // namespace strainsim::actuator
