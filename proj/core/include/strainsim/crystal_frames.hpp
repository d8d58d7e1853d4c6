#pragma once

// Strain tensors and the rotations between the device frame and the internal
// frames of the four <111> color-center orientations.
//
// Device frame: X = [110], Y = [-110], Z = [001] in cubic crystal coordinates.
// An emitter frame has Z' along the dipole axis and X' chosen deterministically
// (see default_x_axis()).

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace strainsim::crystal {

/// Miller-index direction kept as an exact integer triple.
struct CrystalDirection {
  int h = 0;
  int k = 0;
  int l = 0;

  constexpr long long dot(const CrystalDirection& o) const noexcept {
    return static_cast<long long>(h) * o.h + static_cast<long long>(k) * o.k +
           static_cast<long long>(l) * o.l;
  }
  constexpr long long norm2() const noexcept { return dot(*this); }
  constexpr bool is_zero() const noexcept { return h == 0 && k == 0 && l == 0; }

  /// Unit vector; throws DegenerateDirectionError for the zero triple.
  Eigen::Vector3d unit() const;

  friend constexpr bool operator==(const CrystalDirection&, const CrystalDirection&) = default;
};

std::string to_string(const CrystalDirection& d);

/// `crystal` labels cubic-axis components; strain tensors normally live in the other three.
enum class Frame { crystal, device, snv_axial, snv_transverse };

std::string_view to_string(Frame frame);
Frame frame_from_string(std::string_view name);

inline bool is_snv_frame(Frame f) { return f == Frame::snv_axial || f == Frame::snv_transverse; }

/// Proper rotation R (orthogonal, det +1) taking components in `from` to `to`.
class FrameRotation {
 public:
  /// Validates orthogonality and det(R) = +1 to 1e-12.
  FrameRotation(const Eigen::Matrix3d& matrix, Frame from, Frame to);

  const Eigen::Matrix3d& matrix() const noexcept { return matrix_; }
  Frame from() const noexcept { return from_; }
  Frame to() const noexcept { return to_; }

  FrameRotation inverse() const;

  /// Apply `this` after `first`: (this * first) maps first.from() to this->to().
  FrameRotation after(const FrameRotation& first) const;

 private:
  Eigen::Matrix3d matrix_;
  Frame from_;
  Frame to_;
};

/// Symmetric dimensionless strain with an explicit frame tag.
class StrainTensor {
 public:
  StrainTensor() : components_(Eigen::Matrix3d::Zero()), frame_(Frame::device) {}
  /// Symmetrizes after checking |A - A^T| <= 1e-15 * max(1, |A|_max).
  StrainTensor(const Eigen::Matrix3d& components, Frame frame);

  static StrainTensor zero(Frame frame) { return {Eigen::Matrix3d::Zero(), frame}; }
  /// Voigt order [xx, yy, zz, yz, xz, xy]; shear entries are tensor components, not engineering strain.
  static StrainTensor from_voigt(const std::array<double, 6>& voigt, Frame frame);

  std::array<double, 6> voigt() const;
  const Eigen::Matrix3d& components() const noexcept { return components_; }
  Frame frame() const noexcept { return frame_; }

  double operator()(int i, int j) const { return components_(i, j); }
  double xx() const { return components_(0, 0); }
  double yy() const { return components_(1, 1); }
  double zz() const { return components_(2, 2); }
  double yz() const { return components_(1, 2); }
  double zx() const { return components_(2, 0); }
  double xy() const { return components_(0, 1); }
  double trace() const { return components_.trace(); }

  StrainTensor scaled(double factor) const { return {components_ * factor, frame_}; }

 private:
  Eigen::Matrix3d components_;
  Frame frame_;
};

enum class OrientationClass { axial, transverse };

std::string_view to_string(OrientationClass c);

struct SnVOrientation {
  OrientationClass orientation_class = OrientationClass::axial;
  CrystalDirection dipole_axis;
  CrystalDirection x_axis;

  Frame frame() const {
    return orientation_class == OrientationClass::axial ? Frame::snv_axial : Frame::snv_transverse;
  }
};

inline constexpr CrystalDirection kDeviceX{1, 1, 0};
inline constexpr CrystalDirection kDeviceY{-1, 1, 0};
inline constexpr CrystalDirection kDeviceZ{0, 0, 1};

/// Rows of R are x, z cross x, z (normalized). Maps components expressed in the
/// frame the directions are written in onto the primed frame.
FrameRotation rotation_from_axes(const CrystalDirection& z, const CrystalDirection& x,
                                 Frame from = Frame::device, Frame to = Frame::device);

/// eps' = R eps R^T, relabelled to R.to().
StrainTensor transform_strain(const StrainTensor& eps, const FrameRotation& rotation);

/// Integer projection of device X onto the plane normal to `dipole`, falling
/// back to device Y when X is parallel to the dipole.
CrystalDirection default_x_axis(const CrystalDirection& dipole);

/// Axial iff the dipole has a nonzero projection on device X = [110].
SnVOrientation classify_orientation(const CrystalDirection& dipole);

/// Rotation from crystal (cubic) coordinates into the device frame.
FrameRotation crystal_to_device();

/// Rotation from device coordinates into the emitter's primed frame.
FrameRotation device_to_snv(const SnVOrientation& orientation);

/// Uniaxial strain along device X, with optional transverse contraction
/// eps_yy = eps_zz = -poisson_ratio * magnitude. Requires |magnitude| < 0.01.
StrainTensor uniaxial_device_strain(double magnitude, double poisson_ratio = 0.0);

}  // namespace strainsim::crystal
