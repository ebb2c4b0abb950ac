#pragma once

#include <cstdint>
#include <optional>

#include "synthvox/resample.hpp"
#include "synthvox/volume.hpp"

namespace synthvox {

struct AffineSpec {
  std::array<double, 2> scale_range{0.9, 1.1};
  std::array<double, 2> rotation_range_deg{-20.0, 20.0};
  std::array<double, 2> translation_range_mm{-10.0, 10.0};
  void validate() const;
};

struct ElasticSpec {
  int control_points = 12; // per axis, boundary knots included
  double max_displacement_mm = 8.0;
  void validate() const;
};

/// Scaling, rotation and translation about the volume center:
///   x' = Rz Ry Rx S (x - c) + c + t
struct AffineScaleTransform {
  Eigen::Vector3d scale{1.0, 1.0, 1.0};
  Eigen::Vector3d rotation_deg = Eigen::Vector3d::Zero();
  Eigen::Vector3d translation_mm = Eigen::Vector3d::Zero();

  bool is_identity(double tol = 0.0) const;
  Eigen::Matrix4d matrix_about(const Eigen::Vector3d& center) const;
};

/// Per-axis scale, rotation and translation drawn uniformly from the spec
/// ranges, in that fixed order.
AffineScaleTransform sample_affine(const AffineSpec& spec, std::uint64_t seed);

/// Displacements (mm, world axes) on a uniform control lattice spanning the
/// voxel grid; the dense field is the cubic B-spline expansion of the control
/// values. B-spline weights are a convex combination, so dense displacement
/// norms never exceed the largest control norm.
class DeformationField {
public:
  DeformationField(const Geometry& geom, int control_points, double max_displacement_mm);

  int control_points() const { return control_points_; }
  double max_displacement_mm() const { return max_displacement_; }
  const std::array<int, 3>& grid_dims() const { return dims_; }

  Eigen::Vector3d control(int a, int b, int c) const;
  void set_control(int a, int b, int c, const Eigen::Vector3d& d);

  /// Dense displacement (mm) at a (possibly fractional) voxel coordinate.
  Eigen::Vector3d displacement_at_voxel(double i, double j, double k) const;

  /// Voxel coordinate of control point p along an axis.
  double knot_voxel(int axis, int p) const;

  /// FNV-1a over the raw control values, for manifests.
  std::uint64_t content_hash() const;

  void validate() const;

private:
  std::size_t cindex(int a, int b, int c) const;

  std::array<int, 3> dims_;   // voxel grid this field deforms
  int control_points_;
  double max_displacement_;
  std::array<double, 3> lattice_step_; // voxels between knots
  std::vector<double> control_;        // P^3 * 3, x-fastest
};

/// Control displacements uniform per component in [-max, max], then clamped
/// to the max norm.
DeformationField sample_elastic(const Geometry& geom, const ElasticSpec& spec,
                                std::uint64_t seed);

/// Backward warp: output voxel v samples the input at world(v) + field(v).
ScalarVolume warp(const ScalarVolume& vol, const DeformationField& field, Interp mode,
                  float fill = 0.0f);
LabelVolume warp(const LabelVolume& vol, const DeformationField& field, Interp mode,
                 std::optional<std::int32_t> fill = std::nullopt);

/// Resample through the affine-scale transform (pull, about volume center).
ScalarVolume apply_affine(const ScalarVolume& vol, const AffineScaleTransform& t, Interp mode,
                          float fill = 0.0f);
LabelVolume apply_affine(const LabelVolume& vol, const AffineScaleTransform& t, Interp mode,
                         std::optional<std::int32_t> fill = std::nullopt);

} // namespace synthvox
