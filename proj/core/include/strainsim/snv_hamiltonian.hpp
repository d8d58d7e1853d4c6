#pragma once

// Ground- and excited-manifold Hamiltonians of a tin-vacancy center.
//
// Basis ordering is orbital-major: {e_x up, e_x down, e_y up, e_y down}.
//   H_SO      = (lambda / 2) sigma_y(orb) (x) sigma_z(spin)
//   H_strain  = eps_A1 I + eps_Egx sigma_z(orb) (x) I + eps_Egy sigma_x(orb) (x) I
//   H_Zeeman  = (gamma_s / 2) B . sigma(spin) (x) I + q gamma_L B_z L_z,  L_z = sigma_y(orb)
// Energies in GHz, fields in tesla (emitter frame), susceptibilities in PHz/strain.

#include <array>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "strainsim/crystal_frames.hpp"

namespace strainsim::snv {

inline constexpr double kGhzPerPhz = 1e6;
inline constexpr double kHzPerGhz = 1e9;

enum class Manifold { ground, excited };

/// How a quoted "pre-strain" energy maps onto the static E_g term.
enum class PrestrainReading {
  eg_magnitude,        // sqrt(egx^2 + egy^2) equals the quoted value
  orbital_splitting,   // the resulting ground orbital splitting equals the quoted value
};

std::string_view to_string(PrestrainReading reading);
PrestrainReading prestrain_reading_from_string(std::string_view name);

struct SnVParams {
  double lambda_g_ghz = 850.0;
  double lambda_u_ghz = 3000.0;
  double t_par_g_phz = 0.23;
  double t_perp_g_phz = 0.1;
  double t_par_u_phz = -0.23;
  double t_perp_u_phz = 0.1;
  double d_g_phz = 1.0;
  double f_g_phz = 1.0;
  double d_u_phz = 1.0;
  double f_u_phz = 1.0;
  double gamma_s_ghz_per_t = 28.0;
  double gamma_l_ghz_per_t = 14.0;
  double q = 0.1;
  double prestrain_egx_ghz = 0.0;
  double prestrain_egy_ghz = 0.0;

  /// Throws ParameterError unless lambdas > 0, gamma_s > 0 and q in [0, 1].
  void validate() const;

  /// Copy with the static E_g term replaced (applied along egx).
  SnVParams with_prestrain(double prestrain_ghz, PrestrainReading reading) const;
  SnVParams without_prestrain() const;

  bool operator==(const SnVParams&) const = default;
};

/// E_g magnitude along egx realising `prestrain_ghz` under `reading`.
double prestrain_egx_for(double prestrain_ghz, PrestrainReading reading, double lambda_g_ghz);

using Matrix4c = Eigen::Matrix<std::complex<double>, 4, 4>;
using Vector4c = Eigen::Matrix<std::complex<double>, 4, 1>;

struct ManifoldHamiltonian {
  Matrix4c matrix;
  Manifold manifold = Manifold::ground;
};

struct EigenSystem {
  std::array<double, 4> values{};  // ascending, GHz
  Matrix4c vectors;                // column i pairs with values[i]
};

struct Transition {
  std::string label;
  double frequency_ghz = 0.0;  // relative to the unstrained zero-field line centroid
  double relative_strength = 0.0;
};

using TransitionTable = std::vector<Transition>;

/// Symmetry-decomposed strain energies (GHz) for one manifold.
struct StrainEnergies {
  double a1 = 0.0;
  double egx = 0.0;
  double egy = 0.0;
};

StrainEnergies strain_energies(const SnVParams& params, Manifold manifold,
                               const crystal::StrainTensor& eps, bool include_prestrain);

/// Throws FrameMismatchError unless `eps` is tagged with an emitter frame.
ManifoldHamiltonian build_manifold_hamiltonian(const SnVParams& params, Manifold manifold,
                                               const crystal::StrainTensor& eps,
                                               const Eigen::Vector3d& b_tesla);

/// Strain-only part of the Hamiltonian (no spin-orbit, no field).
Matrix4c strain_operator(const SnVParams& params, Manifold manifold, const crystal::StrainTensor& eps,
                         bool include_prestrain);

/// Ascending eigenpairs. Each eigenvector is phased so its largest-magnitude
/// component is real and positive.
EigenSystem diagonalize(const ManifoldHamiltonian& h);

/// Transitions grouped by branch: A (upper excited -> lower ground), B (upper -> upper),
/// C (lower -> lower), D (lower -> upper). Lines that coincide within 1e-9 GHz inside a
/// group merge and keep the bare group label. A group split into four lines is labelled
/// "C:A1", "C:A2" (two strongest, spin-conserving) and "C:B1", "C:B2" (spin-flipping),
/// each pair numbered by ascending frequency.
TransitionTable optical_transitions(const SnVParams& params, const crystal::StrainTensor& eps,
                                    const Eigen::Vector3d& b_tesla);

struct DcShift {
  double approximate_ghz = 0.0;  // (t_par_u - t_par_g) eps_z'z'
  double exact_ghz = 0.0;        // C-line shift from the full transition tables
};

DcShift delta_dc(const SnVParams& params, const crystal::StrainTensor& eps);

/// Half the peak-to-peak C-line excursion for a strain oscillating between +eps and -eps.
double delta_ac_ghz(const SnVParams& params, const crystal::StrainTensor& eps_amplitude);

/// Orbital single-phonon coupling |E_g| of the ground manifold, without pre-strain, in Hz.
double g_orb_hz(const SnVParams& params, const crystal::StrainTensor& eps_zpf);

/// |<E1|H_strain(eps_zpf)|E2>| between the two lowest ground eigenstates of the
/// pre-strained ground Hamiltonian in field `b_tesla`, in Hz.
double g_sm_hz(const SnVParams& params, const crystal::StrainTensor& eps_zpf,
               const Eigen::Vector3d& b_tesla);

/// E2 - E1 of the ground manifold (pre-strain from params, zero applied strain).
double spin_transition_frequency_ghz(const SnVParams& params, const Eigen::Vector3d& b_tesla);

struct GsmPoint {
  double b_tesla = 0.0;
  double g_sm_hz = 0.0;
};

/// g_sm along the emitter X' axis (field perpendicular to the dipole) for each magnitude.
std::vector<GsmPoint> g_sm_field_sweep(const SnVParams& params, const crystal::StrainTensor& eps_zpf,
                                       std::span<const double> b_range_tesla);

}  // namespace strainsim::snv
