#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "strainsim/crystal_frames.hpp"
#include "strainsim/errors.hpp"

using namespace strainsim;
using namespace strainsim::crystal;

namespace {

StrainTensor random_strain(std::mt19937_64& rng, Frame frame, double scale = 1e-4) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return StrainTensor::from_voigt({u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)}, frame);
}

}  // namespace

TEST_CASE("orientation classes against device [110]") {
  CHECK(classify_orientation({1, 1, 1}).orientation_class == OrientationClass::axial);
  CHECK(classify_orientation({-1, -1, 1}).orientation_class == OrientationClass::axial);
  CHECK(classify_orientation({1, 1, -1}).orientation_class == OrientationClass::axial);
  CHECK(classify_orientation({1, -1, 1}).orientation_class == OrientationClass::transverse);
  CHECK(classify_orientation({-1, 1, 1}).orientation_class == OrientationClass::transverse);
  CHECK_THROWS_AS(classify_orientation({1, 1, 0}), UnsupportedOrientationError);
  CHECK_THROWS_AS(classify_orientation({0, 0, 0}), DegenerateDirectionError);
}

TEST_CASE("default x axis is perpendicular to the dipole") {
  for (CrystalDirection d : {CrystalDirection{1, 1, 1}, {1, -1, 1}, {-1, 1, 1}, {1, 1, -1}, {-1, -1, -1}}) {
    const auto x = default_x_axis(d);
    CHECK_FALSE(x.is_zero());
    CHECK(x.dot(d) == 0);
  }
  // [110] projected off [111] is [112bar] up to scale.
  const auto x = default_x_axis({1, 1, 1});
  CHECK(x.h == x.k);
  CHECK(x.l == -2 * x.h);
}

TEST_CASE("crystal to device maps cubic axes onto [110], [-110], [001]") {
  const auto r = crystal_to_device().matrix();
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::Matrix3d expected;
  expected << s, s, 0, -s, s, 0, 0, 0, 1;
  CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rotations are proper and invertible") {
  for (CrystalDirection d : {CrystalDirection{1, 1, 1}, {1, -1, 1}, {-1, 1, 1}, {1, 1, -1}}) {
    const auto rot = device_to_snv(classify_orientation(d));
    const auto& m = rot.matrix();
    CHECK((m * m.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(m.determinant() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((rot.after(rot.inverse()).matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  }
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1;
  CHECK_THROWS_AS(FrameRotation(reflect, Frame::device, Frame::snv_axial), PerpendicularityError);
}

TEST_CASE("emitter z' is the dipole expressed in device coordinates") {
  const CrystalDirection d{1, 1, 1};
  const auto rot = device_to_snv(classify_orientation(d));
  const Eigen::Vector3d dipole_device = crystal_to_device().matrix() * d.unit();
  const Eigen::Vector3d z = rot.matrix() * dipole_device;
  CHECK(z.x() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(z.y() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(z.z() == doctest::Approx(1.0));
}

TEST_CASE("uniaxial [110] strain projected on a <111> axis") {
  // eps_z'z' = eps (n . X)^2 with X = [110]/sqrt2 and n = [111]/sqrt3 -> 2/3.
  const auto eps = uniaxial_device_strain(1e-5);
  const auto axial = transform_strain(eps, device_to_snv(classify_orientation({1, 1, 1})));
  CHECK(axial.zz() == doctest::Approx(1e-5 * 2.0 / 3.0).epsilon(1e-12));
  CHECK(axial.frame() == Frame::snv_axial);
  const auto trans = transform_strain(eps, device_to_snv(classify_orientation({1, -1, 1})));
  CHECK(std::abs(trans.zz()) < 1e-20);
  CHECK(trans.frame() == Frame::snv_transverse);
}

TEST_CASE("strain invariants survive rotation") {
  std::mt19937_64 rng(7);
  const auto rot = device_to_snv(classify_orientation({-1, 1, 1}));
  for (int i = 0; i < 200; ++i) {
    const auto eps = random_strain(rng, Frame::device);
    const auto out = transform_strain(eps, rot);
    CHECK(out.trace() == doctest::Approx(eps.trace()).epsilon(1e-10).scale(1e-4));
    const double n_in = eps.components().squaredNorm();
    const double n_out = out.components().squaredNorm();
    CHECK(n_out == doctest::Approx(n_in).epsilon(1e-12));
    const auto back = transform_strain(out, rot.inverse());
    CHECK((back.components() - eps.components()).cwiseAbs().maxCoeff() < 1e-18);
  }
}

TEST_CASE("voigt round trip and symmetry checks") {
  const std::array<double, 6> v{1, 2, 3, 4, 5, 6};
  const auto t = StrainTensor::from_voigt(v, Frame::device);
  CHECK(t.voigt() == v);
  CHECK(t.xy() == 6);
  CHECK(t.zx() == 5);
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a(0, 1) = 1e-3;
  CHECK_THROWS(StrainTensor(a, Frame::device));
  CHECK_THROWS_AS(uniaxial_device_strain(0.02), StrainRangeError);
  CHECK_THROWS_AS(transform_strain(StrainTensor::zero(Frame::snv_axial),
                                   device_to_snv(classify_orientation({1, 1, 1}))),
                  FrameMismatchError);
}

TEST_CASE("frame names") {
  for (Frame f : {Frame::crystal, Frame::device, Frame::snv_axial, Frame::snv_transverse}) {
    CHECK(frame_from_string(to_string(f)) == f);
  }
}
