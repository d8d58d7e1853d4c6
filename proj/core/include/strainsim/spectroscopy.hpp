#pragma once

// PLE spectrum synthesis (static, slow modulation, resolved sidebands) and
// the inverse fits that recover linewidths, shifts and modulation indices.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace strainsim::spectroscopy {

struct PLESpectrum {
  std::vector<double> detuning_ghz;
  std::vector<double> signal;
  std::map<std::string, std::string> meta;

  /// Throws SpectrumFormatError unless lengths match, the grid is strictly
  /// ascending and finite, and every signal value is finite and >= 0.
  void validate() const;
  std::size_t size() const { return detuning_ghz.size(); }
};

struct LorentzianFit {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double center_sigma = 0.0;
  double fwhm_sigma = 0.0;
  double amplitude_sigma = 0.0;
  double baseline_sigma = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
};

struct SidebandFit {
  double center = 0.0;
  double fwhm = 0.0;
  double beta = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double omega_d = 0.0;  // GHz
  int k_max = 1;
  double center_sigma = 0.0;
  double fwhm_sigma = 0.0;
  double beta_sigma = 0.0;
  double amplitude_sigma = 0.0;
  double baseline_sigma = 0.0;
  double residual_norm = 0.0;
  int iterations = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_sigma = 0.0;
  double intercept_sigma = 0.0;
  double residual_norm = 0.0;
};

struct DeltaAcEstimate {
  double value_ghz = 0.0;
  double sigma_ghz = 0.0;
  bool horns_resolved = false;
};

enum class ModulationConvention {
  as_printed,  // beta = (g / omega) <n>
  sqrt_n,      // beta = 2 g sqrt(<n>) / omega
};

std::string_view to_string(ModulationConvention c);
ModulationConvention modulation_convention_from_string(std::string_view name);

/// First-kind Bessel function of integer order. Negative orders and arguments
/// use the reflection identities. Throws BesselDomainError for |k| > 30 or |x| > 50.
double bessel_j(int k, double x);

/// Lorentzian peak with unit height: (G/2)^2 / (d^2 + (G/2)^2).
double lorentzian(double detuning, double fwhm);

PLESpectrum synth_static(double center, double fwhm, double amplitude, double baseline,
                         std::span<const double> grid);

/// Phase average of a unit-height Lorentzian swept sinusoidally by +/-delta_ac,
/// evaluated with an n_phase-point periodic trapezoid.
PLESpectrum synth_slow_modulation(double center, double fwhm, double delta_ac, std::span<const double> grid,
                                  int n_phase = 256);

/// sum_k J_k(beta)^2 L(d - center - k omega_d) for |k| <= k_max; k_max defaults to ceil(beta) + 8.
/// Records a "warning" entry in meta when omega_d < 3 fwhm.
PLESpectrum synth_sidebands(double center, double fwhm, double beta, double omega_d,
                            std::optional<int> k_max, std::span<const double> grid);

int default_k_max(double beta);

LorentzianFit fit_lorentzian(const PLESpectrum& spec);

SidebandFit fit_sideband_comb(const PLESpectrum& spec, double omega_d);

/// Half the outer-horn separation when resolved, else (FWHM - gamma_ref) / 2.
DeltaAcEstimate extract_delta_ac(const PLESpectrum& spec, std::optional<double> gamma_ref = std::nullopt);

/// Weighted least squares when sigmas are given (absolute errors), ordinary otherwise.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys,
                     std::span<const double> y_sigmas = {});

/// Inverts the modulation-index relation for the phonon occupation.
double phonon_number(double beta, double omega_d_hz, double g_orb_hz,
                     ModulationConvention convention = ModulationConvention::as_printed);

/// Forward relation: modulation index for occupation `n`.
double modulation_index(double n, double omega_d_hz, double g_orb_hz,
                        ModulationConvention convention = ModulationConvention::as_printed);

struct BatchItem {
  std::optional<LorentzianFit> fit;
  std::string error;
};

/// Fits every spectrum on up to `jobs` threads. Output order follows input and
/// is identical to a sequential run.
std::vector<BatchItem> batch_fit_lorentzian(std::span<const PLESpectrum> spectra, int jobs);

PLESpectrum read_spectrum_csv(std::istream& in);
PLESpectrum read_spectrum_csv(const std::string& path);
void write_spectrum_csv(std::ostream& out, const PLESpectrum& spec);
void write_spectrum_csv(const std::string& path, const PLESpectrum& spec);

/// Evenly spaced grid of n points covering [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace strainsim::spectroscopy
