#pragma once

#include <array>
#include <cstddef>

#include <Eigen/Dense>

namespace synthvox {

/// World geometry of a 3D voxel grid: dimensions, spacing and the 4x4 affine
/// mapping voxel indices to world millimetres.
struct Geometry {
  std::array<int, 3> dims{0, 0, 0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  Eigen::Matrix4d affine = Eigen::Matrix4d::Identity();

  /// Axis-aligned grid with the given spacing and world origin.
  static Geometry axis_aligned(std::array<int, 3> dims,
                               std::array<double, 3> spacing = {1.0, 1.0, 1.0},
                               std::array<double, 3> origin = {0.0, 0.0, 0.0});

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }

  Eigen::Vector3d voxel_to_world(const Eigen::Vector3d& v) const {
    return affine.topLeftCorner<3, 3>() * v + affine.topRightCorner<3, 1>();
  }

  Eigen::Matrix4d world_to_voxel() const;

  /// Geometric center of the grid in world mm (used as rotation center).
  Eigen::Vector3d world_center() const;

  bool same_grid(const Geometry& other, double tol = 1e-6) const;

  /// Throws GeometryError when the affine is singular or spacing disagrees
  /// with the affine column norms beyond 1e-6.
  void validate() const;
};

/// Rigid motion parameterized as extrinsic XYZ Euler angles (degrees) plus a
/// translation in mm, both applied about a volume center c:
///   x' = R (x - c) + c + t     with R = Rz * Ry * Rx.
struct RigidTransform {
  Eigen::Vector3d translation_mm = Eigen::Vector3d::Zero();
  Eigen::Vector3d rotation_deg = Eigen::Vector3d::Zero();

  bool is_identity(double tol = 0.0) const {
    return translation_mm.lpNorm<Eigen::Infinity>() <= tol &&
           rotation_deg.lpNorm<Eigen::Infinity>() <= tol;
  }

  Eigen::Matrix3d rotation_matrix() const;
  Eigen::Matrix4d matrix_about(const Eigen::Vector3d& center) const;

  /// Parameters of the inverse map (independent of the chosen center).
  RigidTransform inverse() const;

  /// a.compose(b): the transform equivalent to applying b first, then a.
  static RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

  /// Extrinsic XYZ Euler angles (degrees) of a rotation matrix.
  static Eigen::Vector3d euler_xyz_deg(const Eigen::Matrix3d& rot);
};

} // namespace synthvox
