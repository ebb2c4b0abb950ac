#include "synthvox/geometry.hpp"

#include <cmath>
#include <sstream>

#include "synthvox/errors.hpp"

namespace synthvox {

Geometry Geometry::axis_aligned(std::array<int, 3> dims, std::array<double, 3> spacing,
                                std::array<double, 3> origin) {
  Geometry g;
  g.dims = dims;
  g.spacing = spacing;
  g.affine = Eigen::Matrix4d::Identity();
  for (int a = 0; a < 3; ++a) {
    g.affine(a, a) = spacing[a];
    g.affine(a, 3) = origin[a];
  }
  g.validate();
  return g;
}

Eigen::Matrix4d Geometry::world_to_voxel() const {
  return affine.inverse();
}

Eigen::Vector3d Geometry::world_center() const {
  const Eigen::Vector3d c_vox{(dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0};
  return voxel_to_world(c_vox);
}

bool Geometry::same_grid(const Geometry& other, double tol) const {
  if (dims != other.dims) return false;
  return (affine - other.affine).cwiseAbs().maxCoeff() <= tol;
}

void Geometry::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] <= 0) throw GeometryError("geometry: non-positive dimension");
    if (!(spacing[a] > 0.0)) throw GeometryError("geometry: non-positive spacing");
  }
  const double det = affine.topLeftCorner<3, 3>().determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-12) {
    throw GeometryError("geometry: affine is not invertible");
  }
  for (int a = 0; a < 3; ++a) {
    const double norm = affine.block<3, 1>(0, a).norm();
    if (std::abs(norm - spacing[a]) > 1e-6 * std::max(1.0, spacing[a])) {
      std::ostringstream os;
      os << "geometry: spacing[" << a << "]=" << spacing[a]
         << " does not match affine column norm " << norm;
      throw GeometryError(os.str());
    }
  }
}

namespace {

Eigen::Matrix3d rot_x(double rad) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  const double c = std::cos(rad), s = std::sin(rad);
  m(1, 1) = c; m(1, 2) = -s;
  m(2, 1) = s; m(2, 2) = c;
  return m;
}

Eigen::Matrix3d rot_y(double rad) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  const double c = std::cos(rad), s = std::sin(rad);
  m(0, 0) = c; m(0, 2) = s;
  m(2, 0) = -s; m(2, 2) = c;
  return m;
}

Eigen::Matrix3d rot_z(double rad) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
  const double c = std::cos(rad), s = std::sin(rad);
  m(0, 0) = c; m(0, 1) = -s;
  m(1, 0) = s; m(1, 1) = c;
  return m;
}

constexpr double kDegToRad = M_PI / 180.0;

} // namespace

Eigen::Matrix3d RigidTransform::rotation_matrix() const {
  // Extrinsic XYZ: rotate about fixed X, then Y, then Z.
  return rot_z(rotation_deg[2] * kDegToRad) * rot_y(rotation_deg[1] * kDegToRad) *
         rot_x(rotation_deg[0] * kDegToRad);
}

Eigen::Matrix4d RigidTransform::matrix_about(const Eigen::Vector3d& center) const {
  const Eigen::Matrix3d rot = rotation_matrix();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rot;
  m.topRightCorner<3, 1>() = center + translation_mm - rot * center;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  const Eigen::Matrix3d rot_t = rotation_matrix().transpose();
  RigidTransform inv;
  inv.rotation_deg = euler_xyz_deg(rot_t);
  inv.translation_mm = -(rot_t * translation_mm);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& a, const RigidTransform& b) {
  const Eigen::Matrix3d ra = a.rotation_matrix();
  RigidTransform out;
  out.rotation_deg = euler_xyz_deg(ra * b.rotation_matrix());
  out.translation_mm = a.translation_mm + ra * b.translation_mm;
  return out;
}

Eigen::Vector3d RigidTransform::euler_xyz_deg(const Eigen::Matrix3d& rot) {
  // R = Rz * Ry * Rx, so R(2,0) = -sin(y).
  double x, y, z;
  if (std::abs(rot(2, 0)) < 1.0 - 1e-12) {
    y = std::asin(-rot(2, 0));
    x = std::atan2(rot(2, 1), rot(2, 2));
    z = std::atan2(rot(1, 0), rot(0, 0));
  } else {
    // Gimbal lock: fold z into x.
    y = rot(2, 0) < 0 ? M_PI / 2.0 : -M_PI / 2.0;
    x = std::atan2(-rot(0, 1), rot(1, 1));
    z = 0.0;
  }
  return Eigen::Vector3d{x, y, z} / kDegToRad;
}

} // namespace synthvox
