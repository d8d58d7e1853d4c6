#include "strainsim/crystal_frames.hpp"

#include <cmath>
#include <cstdlib>

#include <Eigen/Geometry>

#include "strainsim/errors.hpp"

namespace strainsim::crystal {

namespace {

constexpr double kRotationTol = 1e-12;
constexpr double kSymmetryTol = 1e-15;
constexpr double kLinearElasticLimit = 0.01;

CrystalDirection integer_projection(const CrystalDirection& v, const CrystalDirection& normal) {
  // (n.n) v - (v.n) n is perpendicular to n and stays integral.
  const long long nn = normal.norm2();
  const long long vn = v.dot(normal);
  return {static_cast<int>(nn * v.h - vn * normal.h), static_cast<int>(nn * v.k - vn * normal.k),
          static_cast<int>(nn * v.l - vn * normal.l)};
}

}  // namespace

Eigen::Vector3d CrystalDirection::unit() const {
  if (is_zero()) throw DegenerateDirectionError("zero crystal direction cannot be normalized");
  Eigen::Vector3d v(h, k, l);
  return v / v.norm();
}

std::string to_string(const CrystalDirection& d) {
  return "[" + std::to_string(d.h) + "," + std::to_string(d.k) + "," + std::to_string(d.l) + "]";
}

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::crystal: return "crystal";
    case Frame::device: return "device";
    case Frame::snv_axial: return "snv-axial";
    case Frame::snv_transverse: return "snv-transverse";
  }
  return "unknown";
}

Frame frame_from_string(std::string_view name) {
  if (name == "crystal") return Frame::crystal;
  if (name == "device") return Frame::device;
  if (name == "snv-axial") return Frame::snv_axial;
  if (name == "snv-transverse") return Frame::snv_transverse;
  throw FrameMismatchError("unknown frame label '" + std::string(name) + "'");
}

std::string_view to_string(OrientationClass c) {
  return c == OrientationClass::axial ? "axial" : "transverse";
}

FrameRotation::FrameRotation(const Eigen::Matrix3d& matrix, Frame from, Frame to)
    : matrix_(matrix), from_(from), to_(to) {
  const double ortho = (matrix.transpose() * matrix - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < kRotationTol)) {
    throw PerpendicularityError("rotation matrix is not orthogonal (|R^T R - I| = " +
                                    std::to_string(ortho) + ")");
  }
  const double det = matrix.determinant();
  if (!(std::abs(det - 1.0) <= kRotationTol)) {
    throw PerpendicularityError("rotation matrix is improper (det = " + std::to_string(det) + ")");
  }
}

FrameRotation FrameRotation::inverse() const { return {matrix_.transpose(), to_, from_}; }

FrameRotation FrameRotation::after(const FrameRotation& first) const {
  if (first.to() != from_) {
    throw FrameMismatchError("cannot compose rotation into " + std::string(to_string(first.to())) +
                             " with rotation from " + std::string(to_string(from_)));
  }
  return {matrix_ * first.matrix(), first.from(), to_};
}

StrainTensor::StrainTensor(const Eigen::Matrix3d& components, Frame frame) : frame_(frame) {
  const double scale = std::max(1.0, components.cwiseAbs().maxCoeff());
  const double asym = (components - components.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymmetryTol * scale)) {
    throw StrainRangeError("strain tensor is not symmetric (|A - A^T| = " + std::to_string(asym) + ")");
  }
  if (!components.allFinite()) throw StrainRangeError("strain tensor has non-finite components");
  components_ = 0.5 * (components + components.transpose());
}

StrainTensor StrainTensor::from_voigt(const std::array<double, 6>& v, Frame frame) {
  Eigen::Matrix3d m;
  m << v[0], v[5], v[4],
       v[5], v[1], v[3],
       v[4], v[3], v[2];
  return {m, frame};
}

std::array<double, 6> StrainTensor::voigt() const {
  const auto& m = components_;
  return {m(0, 0), m(1, 1), m(2, 2), m(1, 2), m(0, 2), m(0, 1)};
}

FrameRotation rotation_from_axes(const CrystalDirection& z, const CrystalDirection& x, Frame from,
                                 Frame to) {
  const Eigen::Vector3d zu = z.unit();
  const Eigen::Vector3d xu = x.unit();
  const double overlap = zu.dot(xu);
  if (!(std::abs(overlap) < kRotationTol)) {
    throw PerpendicularityError("axes " + to_string(z) + " and " + to_string(x) +
                                " are not perpendicular (cos = " + std::to_string(overlap) + ")");
  }
  const Eigen::Vector3d yu = zu.cross(xu);
  Eigen::Matrix3d r;
  r.row(0) = xu.transpose();
  r.row(1) = yu.transpose();
  r.row(2) = zu.transpose();
  return {r, from, to};
}

StrainTensor transform_strain(const StrainTensor& eps, const FrameRotation& rotation) {
  if (eps.frame() != rotation.from()) {
    throw FrameMismatchError("strain is in frame " + std::string(to_string(eps.frame())) +
                             " but rotation expects " + std::string(to_string(rotation.from())));
  }
  const Eigen::Matrix3d& r = rotation.matrix();
  Eigen::Matrix3d out = r * eps.components() * r.transpose();
  out = 0.5 * (out + out.transpose());
  return {out, rotation.to()};
}

CrystalDirection default_x_axis(const CrystalDirection& dipole) {
  if (dipole.is_zero()) throw DegenerateDirectionError("zero dipole direction");
  CrystalDirection x = integer_projection(kDeviceX, dipole);
  if (x.is_zero()) x = integer_projection(kDeviceY, dipole);
  return x;
}

SnVOrientation classify_orientation(const CrystalDirection& dipole) {
  if (dipole.is_zero()) throw DegenerateDirectionError("zero dipole direction");
  if (std::abs(dipole.h) != 1 || std::abs(dipole.k) != 1 || std::abs(dipole.l) != 1) {
    throw UnsupportedOrientationError("dipole " + to_string(dipole) + " is not a <111> direction");
  }
  SnVOrientation o;
  o.dipole_axis = dipole;
  o.orientation_class = dipole.dot(kDeviceX) != 0 ? OrientationClass::axial : OrientationClass::transverse;
  o.x_axis = default_x_axis(dipole);
  return o;
}

FrameRotation crystal_to_device() {
  return rotation_from_axes(kDeviceZ, kDeviceX, Frame::crystal, Frame::device);
}

FrameRotation device_to_snv(const SnVOrientation& orientation) {
  const FrameRotation crystal_to_snv =
      rotation_from_axes(orientation.dipole_axis, orientation.x_axis, Frame::crystal, orientation.frame());
  return crystal_to_snv.after(crystal_to_device().inverse());
}

StrainTensor uniaxial_device_strain(double magnitude, double poisson_ratio) {
  if (!(std::abs(magnitude) < kLinearElasticLimit)) {
    throw StrainRangeError("uniaxial strain " + std::to_string(magnitude) +
                           " outside the linear-elastic range |eps| < 0.01");
  }
  if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5)) {
    throw StrainRangeError("poisson ratio must lie in [0, 0.5)");
  }
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 0) = magnitude;
  m(1, 1) = -poisson_ratio * magnitude;
  m(2, 2) = -poisson_ratio * magnitude;
  return {m, Frame::device};
}

}  // namespace strainsim::crystal
