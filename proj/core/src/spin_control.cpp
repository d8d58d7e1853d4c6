#include "strainsim/spin_control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "strainsim/errors.hpp"

namespace strainsim::spin {

namespace {

constexpr double kGhz = 1e9;

double flip_probability(const SpinQubit& q, const AcousticPulse& p, double phonons, ModulationConvention conv) {
  const double rabi = acoustic_rabi_frequency(q.g_sm_hz, phonons, conv);
  double prob = rabi_flip_probability(rabi, p.omega_d_hz - q.splitting_ghz * kGhz, p.duration_s);
  if (q.damping_time_s) prob *= std::exp(-p.duration_s / *q.damping_time_s);
  return prob;
}

}  // namespace

void SpinQubit::validate() const {
  if (!(splitting_ghz > 0.0)) throw ParameterError("qubit splitting must be positive");
  if (!(g_sm_hz >= 0.0)) throw ParameterError("g_sm must be non-negative");
  if (!(init_fidelity >= 0.0 && init_fidelity <= 1.0)) throw ParameterError("init fidelity must lie in [0, 1]");
  if (!(readout_contrast >= 0.0)) throw ParameterError("readout contrast must be non-negative");
  if (damping_time_s && !(*damping_time_s > 0.0)) throw ParameterError("damping time must be positive");
}

void AcousticPulse::validate() const {
  if (!(duration_s > 0.0)) throw ParameterError("pulse duration must be positive");
  if (!(phonon_number >= 0.0)) throw ParameterError("phonon number must be non-negative");
  if (!(omega_d_hz >= 0.0)) throw ParameterError("drive frequency must be non-negative");
}

double acoustic_rabi_frequency(double g_sm_hz, double phonon_number, ModulationConvention convention) {
  if (!(g_sm_hz >= 0.0)) throw ParameterError("g_sm must be non-negative");
  if (!(phonon_number >= 0.0)) throw ParameterError("phonon number must be non-negative");
  return convention == ModulationConvention::as_printed ? 2.0 * g_sm_hz * phonon_number
                                                        : 2.0 * g_sm_hz * std::sqrt(phonon_number);
}

double rabi_flip_probability(double rabi_hz, double detuning_hz, double duration_s) {
  if (!(duration_s >= 0.0)) throw ParameterError("duration must be non-negative");
  const double r2 = rabi_hz * rabi_hz;
  const double w2 = r2 + detuning_hz * detuning_hz;
  if (w2 == 0.0) return 0.0;
  const double s = std::sin(std::numbers::pi * std::sqrt(w2) * duration_s);
  return std::clamp(r2 / w2 * s * s, 0.0, 1.0);
}

std::vector<OdmrPoint> simulate_odmr_sweep(const SpinQubit& qubit, const AcousticPulse& pulse_template,
                                           std::span<const double> omega_range_hz, ModulationConvention convention,
                                           const PhononScale& phonon_scale) {
  qubit.validate();
  pulse_template.validate();
  std::vector<OdmrPoint> out;
  out.reserve(omega_range_hz.size());
  for (std::size_t i = 0; i < omega_range_hz.size(); ++i) {
    if (i > 0 && !(omega_range_hz[i] > omega_range_hz[i - 1])) {
      throw ParameterError("ODMR frequency range must be strictly ascending");
    }
    AcousticPulse p = pulse_template;
    p.omega_d_hz = omega_range_hz[i];
    const double phonons = p.phonon_number * (phonon_scale ? phonon_scale(p.omega_d_hz) : 1.0);
    const double prob = flip_probability(qubit, p, phonons, convention);
    out.push_back({p.omega_d_hz, qubit.baseline_counts + qubit.readout_contrast * qubit.init_fidelity * prob});
  }
  return out;
}

SequenceResult simulate_pulse_sequence(const SpinQubit& qubit, std::span<const SequenceStep> sequence,
                                       ModulationConvention convention) {
  qubit.validate();
  SequenceResult out;
  Populations pop;
  bool pumped = false;
  auto pump = [&] {
    pop.p2 = qubit.init_fidelity;
    pop.p1 = 1.0 - qubit.init_fidelity;
  };
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const SequenceStep& step = sequence[i];
    switch (step.kind) {
      case StepKind::pump:
        pump();
        pumped = true;
        break;
      case StepKind::acoustic: {
        step.pulse.validate();
        const double prob = flip_probability(qubit, step.pulse, step.pulse.phonon_number, convention);
        const Populations before = pop;
        pop.p1 = before.p1 * (1.0 - prob) + before.p2 * prob;
        pop.p2 = before.p2 * (1.0 - prob) + before.p1 * prob;
        break;
      }
      case StepKind::readout:
        if (!pumped) {
          throw SequenceOrderError("readout at step " + std::to_string(i) + " precedes any pump");
        }
        out.readout_counts.push_back(qubit.readout_contrast * pop.p1);
        pump();
        break;
    }
    out.trace.push_back(pop);
  }
  return out;
}

}  // namespace strainsim::spin
