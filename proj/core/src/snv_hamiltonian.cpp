#include "strainsim/snv_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "strainsim/errors.hpp"

namespace strainsim::snv {

namespace {

using cd = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;

constexpr double kHermiticityTol = 1e-12;
constexpr double kDegenerateQubitGhz = 1e-6;
constexpr double kLineMergeGhz = 1e-9;
constexpr double kZpfGuard = 1e-9;

const cd I{0.0, 1.0};

Matrix2c pauli_x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}
Matrix2c pauli_y() {
  Matrix2c m;
  m << 0, -I, I, 0;
  return m;
}
Matrix2c pauli_z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}

// orbital (x) spin, orbital index major.
Matrix4c kron(const Matrix2c& orbital, const Matrix2c& spin) {
  Matrix4c out;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) out(2 * a + c, 2 * b + d) = orbital(a, b) * spin(c, d);
  return out;
}

void require_snv_frame(const crystal::StrainTensor& eps) {
  if (!crystal::is_snv_frame(eps.frame())) {
    throw FrameMismatchError("strain must be expressed in an emitter frame, got " +
                             std::string(crystal::to_string(eps.frame())));
  }
}

char group_letter(int excited_branch, int ground_branch) {
  if (excited_branch == 1) return ground_branch == 0 ? 'A' : 'B';
  return ground_branch == 0 ? 'C' : 'D';
}

double group_centroid(const TransitionTable& table, char group) {
  double sum = 0.0;
  int n = 0;
  for (const auto& t : table) {
    if (!t.label.empty() && t.label.front() == group) {
      sum += t.frequency_ghz;
      ++n;
    }
  }
  if (n == 0) throw ParameterError(std::string("transition group ") + group + " missing");
  return sum / n;
}

}  // namespace

std::string_view to_string(PrestrainReading reading) {
  return reading == PrestrainReading::eg_magnitude ? "eg-magnitude" : "orbital-splitting";
}

PrestrainReading prestrain_reading_from_string(std::string_view name) {
  if (name == "eg-magnitude") return PrestrainReading::eg_magnitude;
  if (name == "orbital-splitting") return PrestrainReading::orbital_splitting;
  throw ParameterError("unknown pre-strain reading '" + std::string(name) + "'");
}

void SnVParams::validate() const {
  if (!(lambda_g_ghz > 0.0) || !(lambda_u_ghz > 0.0)) throw ParameterError("spin-orbit splittings must be positive");
  if (!(gamma_s_ghz_per_t > 0.0)) throw ParameterError("gamma_s must be positive");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("orbital quenching factor q must lie in [0, 1]");
  const std::array<double, 12> rest{t_par_g_phz, t_perp_g_phz, t_par_u_phz,       t_perp_u_phz,
                                    d_g_phz,     f_g_phz,      d_u_phz,           f_u_phz,
                                    gamma_l_ghz_per_t, prestrain_egx_ghz, prestrain_egy_ghz, q};
  for (double v : rest) {
    if (!std::isfinite(v)) throw ParameterError("non-finite emitter parameter");
  }
}

double prestrain_egx_for(double prestrain_ghz, PrestrainReading reading, double lambda_g_ghz) {
  if (!(prestrain_ghz >= 0.0)) throw ParameterError("pre-strain must be non-negative");
  if (reading == PrestrainReading::eg_magnitude) return prestrain_ghz;
  // sqrt(lambda^2 + 4 egx^2) = splitting
  if (prestrain_ghz < lambda_g_ghz) {
    throw ParameterError("orbital-splitting pre-strain " + std::to_string(prestrain_ghz) +
                         " GHz is below the spin-orbit splitting");
  }
  return 0.5 * std::sqrt(prestrain_ghz * prestrain_ghz - lambda_g_ghz * lambda_g_ghz);
}

SnVParams SnVParams::with_prestrain(double prestrain_ghz, PrestrainReading reading) const {
  SnVParams p = *this;
  p.prestrain_egx_ghz = prestrain_egx_for(prestrain_ghz, reading, lambda_g_ghz);
  p.prestrain_egy_ghz = 0.0;
  return p;
}

SnVParams SnVParams::without_prestrain() const {
  SnVParams p = *this;
  p.prestrain_egx_ghz = 0.0;
  p.prestrain_egy_ghz = 0.0;
  return p;
}

StrainEnergies strain_energies(const SnVParams& params, Manifold manifold, const crystal::StrainTensor& eps,
                               bool include_prestrain) {
  require_snv_frame(eps);
  const bool ground = manifold == Manifold::ground;
  const double t_par = (ground ? params.t_par_g_phz : params.t_par_u_phz) * kGhzPerPhz;
  const double t_perp = (ground ? params.t_perp_g_phz : params.t_perp_u_phz) * kGhzPerPhz;
  const double d = (ground ? params.d_g_phz : params.d_u_phz) * kGhzPerPhz;
  const double f = (ground ? params.f_g_phz : params.f_u_phz) * kGhzPerPhz;

  StrainEnergies e;
  e.a1 = t_par * eps.zz() + t_perp * (eps.xx() + eps.yy());
  e.egx = d * (eps.xx() - eps.yy()) + f * eps.zx();
  e.egy = -2.0 * d * eps.xy() + f * eps.yz();
  // Pre-strain is a property of the ground-state orbitals.
  if (include_prestrain && ground) {
    e.egx += params.prestrain_egx_ghz;
    e.egy += params.prestrain_egy_ghz;
  }
  return e;
}

Matrix4c strain_operator(const SnVParams& params, Manifold manifold, const crystal::StrainTensor& eps,
                         bool include_prestrain) {
  const StrainEnergies e = strain_energies(params, manifold, eps, include_prestrain);
  const Matrix2c id = Matrix2c::Identity();
  return e.a1 * Matrix4c::Identity() + e.egx * kron(pauli_z(), id) + e.egy * kron(pauli_x(), id);
}

ManifoldHamiltonian build_manifold_hamiltonian(const SnVParams& params, Manifold manifold,
                                               const crystal::StrainTensor& eps, const Eigen::Vector3d& b_tesla) {
  params.validate();
  require_snv_frame(eps);
  const double lambda = manifold == Manifold::ground ? params.lambda_g_ghz : params.lambda_u_ghz;
  const Matrix2c id = Matrix2c::Identity();

  Matrix4c h = 0.5 * lambda * kron(pauli_y(), pauli_z());
  h += strain_operator(params, manifold, eps, /*include_prestrain=*/true);

  const double gs = 0.5 * params.gamma_s_ghz_per_t;
  h += gs * (b_tesla.x() * kron(id, pauli_x()) + b_tesla.y() * kron(id, pauli_y()) +
             b_tesla.z() * kron(id, pauli_z()));
  h += params.q * params.gamma_l_ghz_per_t * b_tesla.z() * kron(pauli_y(), id);

  // Exact Hermitian by construction; remove round-off asymmetry.
  const Matrix4c herm = 0.5 * (h + h.adjoint());
  return {herm, manifold};
}

EigenSystem diagonalize(const ManifoldHamiltonian& h) {
  const Matrix4c& m = h.matrix;
  if (!m.allFinite()) throw NumericalHermiticityError("Hamiltonian has non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (defect > kHermiticityTol * scale) {
    throw NumericalHermiticityError("matrix is not Hermitian (|H - H^dagger| = " + std::to_string(defect) + ")");
  }

  Eigen::SelfAdjointEigenSolver<Matrix4c> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalHermiticityError("eigensolver failed to converge");

  EigenSystem out;
  out.vectors = solver.eigenvectors();
  for (int i = 0; i < 4; ++i) {
    out.values[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    auto col = out.vectors.col(i);
    // Phase convention: largest component real positive (first index wins ties).
    int best = 0;
    double best_mag = -1.0;
    for (int r = 0; r < 4; ++r) {
      const double mag = std::abs(col(r));
      if (mag > best_mag * (1.0 + 1e-12)) {
        best_mag = mag;
        best = r;
      }
    }
    const cd phase = std::conj(col(best)) / best_mag;
    col *= phase;
    col(best) = cd(std::abs(col(best)), 0.0);
  }
  return out;
}

TransitionTable optical_transitions(const SnVParams& params, const crystal::StrainTensor& eps,
                                    const Eigen::Vector3d& b_tesla) {
  const EigenSystem g = diagonalize(build_manifold_hamiltonian(params, Manifold::ground, eps, b_tesla));
  const EigenSystem e = diagonalize(build_manifold_hamiltonian(params, Manifold::excited, eps, b_tesla));

  const Matrix2c id = Matrix2c::Identity();
  const std::array<Matrix4c, 3> dipole{kron(id, id), kron(pauli_z(), id), kron(pauli_x(), id)};

  struct Line {
    double freq;
    double strength;
  };

  TransitionTable table;
  for (int eb : {1, 0}) {
    for (int gb : {0, 1}) {
      std::vector<Line> lines;
      for (int j = 2 * eb; j < 2 * eb + 2; ++j) {
        for (int i = 2 * gb; i < 2 * gb + 2; ++i) {
          double s = 0.0;
          for (const auto& dk : dipole) s += std::norm((e.vectors.col(j).adjoint() * dk * g.vectors.col(i))(0, 0));
          lines.push_back({e.values[static_cast<std::size_t>(j)] - g.values[static_cast<std::size_t>(i)], s});
        }
      }
      std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.freq < b.freq; });

      std::vector<Line> merged;
      for (const auto& l : lines) {
        if (!merged.empty() && std::abs(l.freq - merged.back().freq) < kLineMergeGhz) {
          auto& m = merged.back();
          m.freq = (m.freq * m.strength + l.freq * l.strength) / std::max(m.strength + l.strength, 1e-300);
          m.strength += l.strength;
        } else {
          merged.push_back(l);
        }
      }

      const std::string letter(1, group_letter(eb, gb));
      if (merged.size() == 1) {
        table.push_back({letter, merged[0].freq, merged[0].strength});
      } else if (merged.size() == 4) {
        std::array<std::size_t, 4> order{0, 1, 2, 3};
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return merged[a].strength > merged[b].strength; });
        std::array<std::size_t, 2> conserving{order[0], order[1]};
        std::array<std::size_t, 2> flipping{order[2], order[3]};
        std::sort(conserving.begin(), conserving.end());
        std::sort(flipping.begin(), flipping.end());
        for (int n = 0; n < 2; ++n) {
          const auto& c = merged[conserving[static_cast<std::size_t>(n)]];
          table.push_back({letter + ":A" + std::to_string(n + 1), c.freq, c.strength});
        }
        for (int n = 0; n < 2; ++n) {
          const auto& f = merged[flipping[static_cast<std::size_t>(n)]];
          table.push_back({letter + ":B" + std::to_string(n + 1), f.freq, f.strength});
        }
      } else {
        for (std::size_t n = 0; n < merged.size(); ++n) {
          table.push_back({letter + ":" + std::to_string(n + 1), merged[n].freq, merged[n].strength});
        }
      }
    }
  }

  double max_strength = 0.0;
  for (const auto& t : table) max_strength = std::max(max_strength, t.relative_strength);
  if (max_strength > 0.0) {
    for (auto& t : table) t.relative_strength /= max_strength;
  }
  return table;
}

DcShift delta_dc(const SnVParams& params, const crystal::StrainTensor& eps) {
  require_snv_frame(eps);
  DcShift out;
  out.approximate_ghz = (params.t_par_u_phz - params.t_par_g_phz) * kGhzPerPhz * eps.zz();

  const Eigen::Vector3d no_field = Eigen::Vector3d::Zero();
  const auto strained = optical_transitions(params, eps, no_field);
  const auto reference = optical_transitions(params, crystal::StrainTensor::zero(eps.frame()), no_field);
  out.exact_ghz = group_centroid(strained, 'C') - group_centroid(reference, 'C');
  return out;
}

double delta_ac_ghz(const SnVParams& params, const crystal::StrainTensor& eps_amplitude) {
  const double up = delta_dc(params, eps_amplitude).exact_ghz;
  const double down = delta_dc(params, eps_amplitude.scaled(-1.0)).exact_ghz;
  return 0.5 * std::abs(up - down);
}

double g_orb_hz(const SnVParams& params, const crystal::StrainTensor& eps_zpf) {
  require_snv_frame(eps_zpf);
  if (eps_zpf.components().cwiseAbs().maxCoeff() >= kZpfGuard) {
    throw StrainRangeError("zero-point strain components must be below 1e-9");
  }
  const StrainEnergies e = strain_energies(params, Manifold::ground, eps_zpf, /*include_prestrain=*/false);
  return std::hypot(e.egx, e.egy) * kHzPerGhz;
}

double g_sm_hz(const SnVParams& params, const crystal::StrainTensor& eps_zpf, const Eigen::Vector3d& b_tesla) {
  require_snv_frame(eps_zpf);
  const auto h = build_manifold_hamiltonian(params, Manifold::ground, crystal::StrainTensor::zero(eps_zpf.frame()),
                                            b_tesla);
  const EigenSystem es = diagonalize(h);
  const double splitting = es.values[1] - es.values[0];
  if (splitting < kDegenerateQubitGhz) {
    throw DegenerateQubitError("lowest ground states are degenerate (splitting " + std::to_string(splitting) +
                               " GHz); g_sm is undefined");
  }
  const Matrix4c v = strain_operator(params, Manifold::ground, eps_zpf, /*include_prestrain=*/false);
  const cd element = (es.vectors.col(0).adjoint() * v * es.vectors.col(1))(0, 0);
  return std::abs(element) * kHzPerGhz;
}

double spin_transition_frequency_ghz(const SnVParams& params, const Eigen::Vector3d& b_tesla) {
  const auto h = build_manifold_hamiltonian(params, Manifold::ground, crystal::StrainTensor::zero(crystal::Frame::snv_axial),
                                            b_tesla);
  const EigenSystem es = diagonalize(h);
  return es.values[1] - es.values[0];
}

std::vector<GsmPoint> g_sm_field_sweep(const SnVParams& params, const crystal::StrainTensor& eps_zpf,
                                       std::span<const double> b_range_tesla) {
  for (std::size_t i = 0; i < b_range_tesla.size(); ++i) {
    if (!(b_range_tesla[i] > 0.0)) throw ParameterError("field sweep values must be positive");
    if (i > 0 && !(b_range_tesla[i] > b_range_tesla[i - 1])) throw ParameterError("field sweep must ascend");
  }
  std::vector<GsmPoint> curve;
  curve.reserve(b_range_tesla.size());
  for (double b : b_range_tesla) {
    curve.push_back({b, g_sm_hz(params, eps_zpf, Eigen::Vector3d(b, 0.0, 0.0))});
  }
  return curve;
}

}  // namespace strainsim::snv
