#pragma once

#include <optional>

#include "synthvox/volume.hpp"

namespace synthvox {

enum class Interp { nearest, trilinear };

/// Pull-resample onto a target grid. Out-of-bounds samples take `fill`.
ScalarVolume resample(const ScalarVolume& vol, const Geometry& target, Interp mode,
                      float fill = 0.0f);

/// Labels must use nearest; fill defaults to the dictionary background id.
LabelVolume resample(const LabelVolume& vol, const Geometry& target, Interp mode,
                     std::optional<std::int32_t> fill = std::nullopt);

/// Output voxel v samples the input at R^-1(x_v - c - t) + c, with c the
/// world center of the volume. Output grid equals the input grid.
ScalarVolume apply_rigid(const ScalarVolume& vol, const RigidTransform& t, Interp mode,
                         float fill = 0.0f);
LabelVolume apply_rigid(const LabelVolume& vol, const RigidTransform& t, Interp mode,
                        std::optional<std::int32_t> fill = std::nullopt);

namespace detail {

/// Resample through an output-voxel -> input-voxel affine map (4x4).
ScalarVolume resample_voxel_map(const ScalarVolume& vol, const Geometry& target,
                                const Eigen::Matrix4d& out_to_in_voxel, Interp mode, float fill);
LabelVolume resample_voxel_map(const LabelVolume& vol, const Geometry& target,
                               const Eigen::Matrix4d& out_to_in_voxel, Interp mode,
                               std::int32_t fill);

float sample_trilinear(const ScalarVolume& vol, double x, double y, double z, float fill);
std::int32_t sample_nearest(const LabelVolume& vol, double x, double y, double z,
                            std::int32_t fill);
float sample_nearest(const ScalarVolume& vol, double x, double y, double z, float fill);

} // namespace detail

} // namespace synthvox
