#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "strainsim/errors.hpp"
#include "strainsim/snv_hamiltonian.hpp"

using namespace strainsim;
using namespace strainsim::snv;
using crystal::Frame;
using crystal::StrainTensor;

namespace {

const Eigen::Vector3d kZeroField = Eigen::Vector3d::Zero();

double line(const TransitionTable& t, const std::string& label) {
  for (const auto& l : t) {
    if (l.label == label) return l.frequency_ghz;
  }
  FAIL("missing line " << label);
  return 0.0;
}

// Independent construction with Eigen's Kronecker product; orbital factor first.
Eigen::Matrix4cd reference_ground(double lambda, double egx, double egy, const Eigen::Vector3d& b, double gs) {
  using M2 = Eigen::Matrix2cd;
  const std::complex<double> i(0, 1);
  M2 id = M2::Identity(), sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  Eigen::Matrix4cd h = 0.5 * lambda * Eigen::kroneckerProduct(sy, sz).eval();
  h += egx * Eigen::kroneckerProduct(sz, id).eval() + egy * Eigen::kroneckerProduct(sx, id).eval();
  h += 0.5 * gs * (b.x() * Eigen::kroneckerProduct(id, sx).eval() + b.y() * Eigen::kroneckerProduct(id, sy).eval() +
                   b.z() * Eigen::kroneckerProduct(id, sz).eval());
  return h;
}

}  // namespace

TEST_CASE("unstrained zero-field ground levels are +/- lambda/2, doubly degenerate") {
  const SnVParams p;
  const auto es = diagonalize(build_manifold_hamiltonian(p, Manifold::ground, StrainTensor::zero(Frame::snv_axial),
                                                         kZeroField));
  CHECK(es.values[0] == doctest::Approx(-425.0));
  CHECK(es.values[1] == doctest::Approx(-425.0));
  CHECK(es.values[2] == doctest::Approx(425.0));
  CHECK(es.values[3] == doctest::Approx(425.0));
}

TEST_CASE("E_g strain splits the orbital doublet as sqrt(lambda^2 + 4 E^2)") {
  const SnVParams p;
  const auto eps = StrainTensor::from_voigt({1e-4, -1e-4, 0, 0, 0, 0}, Frame::snv_axial);  // egx = 200 GHz
  const auto es = diagonalize(build_manifold_hamiltonian(p, Manifold::ground, eps, kZeroField));
  CHECK(es.values[2] - es.values[0] == doctest::Approx(std::sqrt(850.0 * 850.0 + 4 * 200.0 * 200.0)));
}

TEST_CASE("Hamiltonian matches an independent Kronecker construction") {
  SnVParams p;
  p.q = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    const auto eps = StrainTensor::from_voigt({1e-4 * u(rng), 1e-4 * u(rng), 0, 0, 0, 1e-4 * u(rng)},
                                              Frame::snv_transverse);
    const Eigen::Vector3d b(u(rng), u(rng), u(rng));
    const auto e = strain_energies(p, Manifold::ground, eps, true);
    const auto h = build_manifold_hamiltonian(p, Manifold::ground, eps, b).matrix;
    const auto ref = reference_ground(p.lambda_g_ghz, e.egx, e.egy, b, p.gamma_s_ghz_per_t);
    const Eigen::Matrix4cd diff = h - ref - e.a1 * Eigen::Matrix4cd::Identity();
    CHECK(diff.cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("zero-strain optical lines sit at +/-(lambda_u +/- lambda_g)/2") {
  const auto t = optical_transitions(SnVParams{}, StrainTensor::zero(Frame::snv_axial), kZeroField);
  CHECK(line(t, "A") == doctest::Approx(1925.0));
  CHECK(line(t, "B") == doctest::Approx(1075.0));
  CHECK(line(t, "C") == doctest::Approx(-1075.0));
  CHECK(line(t, "D") == doctest::Approx(-1925.0));
}

TEST_CASE("axial strain shifts the C line by (t_par_u - t_par_g) eps_zz") {
  const SnVParams p;
  const auto eps = StrainTensor::from_voigt({0, 0, 1e-5, 0, 0, 0}, Frame::snv_axial);
  const auto s = delta_dc(p, eps);
  CHECK(s.approximate_ghz == doctest::Approx(-4.6));
  CHECK(s.exact_ghz == doctest::Approx(-4.6).epsilon(1e-9));
  CHECK(delta_ac_ghz(p, eps) == doctest::Approx(4.6).epsilon(1e-9));
}

TEST_CASE("frame checks") {
  CHECK_THROWS_AS(build_manifold_hamiltonian(SnVParams{}, Manifold::ground, StrainTensor::zero(Frame::device),
                                             kZeroField),
                  FrameMismatchError);
  ManifoldHamiltonian bad{Matrix4c::Zero(), Manifold::ground};
  bad.matrix(0, 1) = 1.0;
  CHECK_THROWS_AS(diagonalize(bad), NumericalHermiticityError);
  SnVParams p;
  p.q = 2.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("orbital coupling from zero-point strain") {
  const auto zpf = StrainTensor::from_voigt({0.5e-12, -0.5e-12, 0, 0, 0, 0}, Frame::snv_axial);
  CHECK(g_orb_hz(SnVParams{}, zpf) == doctest::Approx(1000.0));
  const auto shear = StrainTensor::from_voigt({0, 0, 0, 0, 0, 1e-12}, Frame::snv_axial);
  CHECK(g_orb_hz(SnVParams{}, shear) == doctest::Approx(2000.0));
  CHECK_THROWS_AS(g_orb_hz(SnVParams{}, StrainTensor::from_voigt({1e-8, 0, 0, 0, 0, 0}, Frame::snv_axial)),
                  StrainRangeError);
}

TEST_CASE("spin splitting with pre-strain follows the quenched Zeeman term") {
  // Within the lower orbital doublet the transverse spin term is reduced by E / sqrt(E^2 + lambda^2/4).
  const SnVParams p = SnVParams{}.with_prestrain(865.0, PrestrainReading::eg_magnitude);
  const double b = 0.022;
  const double e = 865.0;
  const double expected = 28.0 * b * e / std::sqrt(e * e + 425.0 * 425.0);
  CHECK(spin_transition_frequency_ghz(p, {b, 0, 0}) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("without pre-strain a transverse field leaves Kramers pairs degenerate") {
  // SO and transverse Zeeman anticommute, so levels are +/- sqrt(lambda^2/4 + (gs B/2)^2), each twice.
  const SnVParams p;
  const auto es = diagonalize(
      build_manifold_hamiltonian(p, Manifold::ground, StrainTensor::zero(Frame::snv_axial), {0.5, 0, 0}));
  const double level = std::sqrt(425.0 * 425.0 + 7.0 * 7.0);
  CHECK(es.values[0] == doctest::Approx(-level));
  CHECK(es.values[1] == doctest::Approx(-level));
  const auto zpf = StrainTensor::from_voigt({1e-12, 0, 0, 0, 0, 1e-12}, Frame::snv_axial);
  CHECK_THROWS_AS(g_sm_hz(p, zpf, {0.5, 0, 0}), DegenerateQubitError);
}

TEST_CASE("g_sm needs a zero-point component off the pre-strain axis") {
  const SnVParams p = SnVParams{}.with_prestrain(865.0, PrestrainReading::eg_magnitude);
  const auto parallel = StrainTensor::from_voigt({1e-12, -1e-12, 0, 0, 0, 0}, Frame::snv_axial);
  const auto perpendicular = StrainTensor::from_voigt({0, 0, 0, 0, 0, 1e-12}, Frame::snv_axial);
  CHECK(g_sm_hz(p, parallel, {0.022, 0, 0}) < 1e-6);
  const double g = g_sm_hz(p, perpendicular, {0.022, 0, 0});
  CHECK(g > 0.0);
  CHECK(g <= g_orb_hz(p, perpendicular));
  CHECK_THROWS_AS(g_sm_hz(p, perpendicular, kZeroField), DegenerateQubitError);
}

TEST_CASE("pre-strain readings") {
  CHECK(prestrain_egx_for(865.0, PrestrainReading::eg_magnitude, 850.0) == 865.0);
  const double e = prestrain_egx_for(1000.0, PrestrainReading::orbital_splitting, 850.0);
  CHECK(std::sqrt(850.0 * 850.0 + 4 * e * e) == doctest::Approx(1000.0));
  CHECK_THROWS_AS(prestrain_egx_for(800.0, PrestrainReading::orbital_splitting, 850.0), ParameterError);
  CHECK(prestrain_reading_from_string(to_string(PrestrainReading::orbital_splitting)) ==
        PrestrainReading::orbital_splitting);
}
