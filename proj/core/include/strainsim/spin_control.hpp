#pragma once

// Acoustically driven spin qubit: optical pump/readout on the spin-flipping
// line and closed-form Rabi transfer between the two lowest ground states.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "strainsim/spectroscopy.hpp"

namespace strainsim::spin {

using spectroscopy::ModulationConvention;

struct SpinQubit {
  double splitting_ghz = 0.55;
  double g_sm_hz = 512.0;
  double init_fidelity = 0.9;
  double readout_contrast = 1.0;  // counts per unit population of |1>
  double baseline_counts = 0.0;   // ODMR floor away from resonance
  std::optional<double> damping_time_s;  // multiplies P_flip by exp(-t / tau) when set

  /// Throws ParameterError unless splitting > 0, g_sm >= 0 and init_fidelity in [0, 1].
  void validate() const;
};

struct AcousticPulse {
  double omega_d_hz = 0.0;
  double phonon_number = 0.0;
  double duration_s = 150e-9;

  void validate() const;
};

/// 2 g_sm <n> (as printed) or 2 g_sm sqrt(<n>).
double acoustic_rabi_frequency(double g_sm_hz, double phonon_number,
                               ModulationConvention convention = ModulationConvention::as_printed);

/// Omega^2 / (Omega^2 + delta^2) sin^2(pi sqrt(Omega^2 + delta^2) t), all in Hz and s.
double rabi_flip_probability(double rabi_hz, double detuning_hz, double duration_s);

struct OdmrPoint {
  double omega_hz = 0.0;
  double counts = 0.0;
};

/// Scales the pulse's phonon number at each drive frequency (e.g. a mechanical transfer function).
using PhononScale = std::function<double(double omega_hz)>;

std::vector<OdmrPoint> simulate_odmr_sweep(const SpinQubit& qubit, const AcousticPulse& pulse_template,
                                           std::span<const double> omega_range_hz,
                                           ModulationConvention convention = ModulationConvention::as_printed,
                                           const PhononScale& phonon_scale = {});

enum class StepKind { pump, acoustic, readout };

struct SequenceStep {
  StepKind kind = StepKind::pump;
  AcousticPulse pulse;  // used by acoustic steps only
};

/// Population of |1> and |2>.
struct Populations {
  double p1 = 0.5;
  double p2 = 0.5;
};

struct SequenceResult {
  std::vector<double> readout_counts;
  std::vector<Populations> trace;  // populations after every step
};

/// Throws SequenceOrderError when a readout precedes every pump.
SequenceResult simulate_pulse_sequence(const SpinQubit& qubit, std::span<const SequenceStep> sequence,
                                       ModulationConvention convention = ModulationConvention::as_printed);

}  // namespace strainsim::spin
