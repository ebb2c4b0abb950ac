#include "synthvox/resample.hpp"

#include <cmath>

namespace synthvox {

namespace detail {

namespace {

template <typename T>
T sample_nearest_impl(const Grid3<T>& vol, double x, double y, double z, T fill) {
  const int i = static_cast<int>(std::llround(x));
  const int j = static_cast<int>(std::llround(y));
  const int k = static_cast<int>(std::llround(z));
  if (!vol.in_bounds(i, j, k)) return fill;
  return vol.at(i, j, k);
}

} // namespace

float sample_nearest(const ScalarVolume& vol, double x, double y, double z, float fill) {
  return sample_nearest_impl(vol, x, y, z, fill);
}

std::int32_t sample_nearest(const LabelVolume& vol, double x, double y, double z,
                            std::int32_t fill) {
  return sample_nearest_impl(vol, x, y, z, fill);
}

float sample_trilinear(const ScalarVolume& vol, double x, double y, double z, float fill) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int z0 = static_cast<int>(std::floor(z));
  const double fx = x - x0, fy = y - y0, fz = z - z0;

  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? fz : 1.0 - fz;
    if (wz == 0.0) continue;
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? fy : 1.0 - fy;
      if (wy == 0.0) continue;
      for (int dx = 0; dx < 2; ++dx) {
        const double wx = dx ? fx : 1.0 - fx;
        if (wx == 0.0) continue;
        const int i = x0 + dx, j = y0 + dy, k = z0 + dz;
        const double v = vol.in_bounds(i, j, k) ? vol.at(i, j, k) : fill;
        acc += wx * wy * wz * v;
      }
    }
  }
  return static_cast<float>(acc);
}

namespace {

template <typename T, typename Sampler>
void resample_into(Grid3<T>& out, const Eigen::Matrix4d& map, Sampler sampler) {
  const Eigen::Matrix3d lin = map.topLeftCorner<3, 3>();
  const Eigen::Vector3d off = map.topRightCorner<3, 1>();
  const Eigen::Vector3d step_i = lin.col(0);

  std::size_t idx = 0;
  for (int k = 0; k < out.geom.dims[2]; ++k) {
    for (int j = 0; j < out.geom.dims[1]; ++j) {
      Eigen::Vector3d p = lin.col(1) * j + lin.col(2) * k + off;
      for (int i = 0; i < out.geom.dims[0]; ++i, ++idx) {
        out.data[idx] = sampler(p[0], p[1], p[2]);
        p += step_i;
      }
    }
  }
}

} // namespace

ScalarVolume resample_voxel_map(const ScalarVolume& vol, const Geometry& target,
                                const Eigen::Matrix4d& out_to_in_voxel, Interp mode, float fill) {
  ScalarVolume out(target);
  if (mode == Interp::trilinear) {
    resample_into(out, out_to_in_voxel,
                  [&](double x, double y, double z) { return sample_trilinear(vol, x, y, z, fill); });
  } else {
    resample_into(out, out_to_in_voxel,
                  [&](double x, double y, double z) { return sample_nearest(vol, x, y, z, fill); });
  }
  return out;
}

LabelVolume resample_voxel_map(const LabelVolume& vol, const Geometry& target,
                               const Eigen::Matrix4d& out_to_in_voxel, Interp mode,
                               std::int32_t fill) {
  if (mode != Interp::nearest) {
    throw Error("label volumes require nearest-neighbor interpolation");
  }
  LabelVolume out(target);
  resample_into(out, out_to_in_voxel,
                [&](double x, double y, double z) { return sample_nearest(vol, x, y, z, fill); });
  out.dictionary = vol.dictionary;
  if (!out.dictionary.contains(fill)) {
    out.dictionary.set(fill, LabelInfo{"label_" + std::to_string(fill), fill, fill});
  }
  return out;
}

} // namespace detail

ScalarVolume resample(const ScalarVolume& vol, const Geometry& target, Interp mode, float fill) {
  target.validate();
  const Eigen::Matrix4d map = vol.geom.world_to_voxel() * target.affine;
  return detail::resample_voxel_map(vol, target, map, mode, fill);
}

LabelVolume resample(const LabelVolume& vol, const Geometry& target, Interp mode,
                     std::optional<std::int32_t> fill) {
  target.validate();
  const std::int32_t f = fill.value_or(vol.dictionary.background_id());
  const Eigen::Matrix4d map = vol.geom.world_to_voxel() * target.affine;
  return detail::resample_voxel_map(vol, target, map, mode, f);
}

namespace {

Eigen::Matrix4d rigid_pull_map(const Geometry& geom, const RigidTransform& t) {
  // world -> world inverse of the forward motion, then into voxel space.
  const Eigen::Matrix4d fwd = t.matrix_about(geom.world_center());
  return geom.world_to_voxel() * fwd.inverse() * geom.affine;
}

} // namespace

ScalarVolume apply_rigid(const ScalarVolume& vol, const RigidTransform& t, Interp mode,
                         float fill) {
  if (t.is_identity()) return vol;
  return detail::resample_voxel_map(vol, vol.geom, rigid_pull_map(vol.geom, t), mode, fill);
}

LabelVolume apply_rigid(const LabelVolume& vol, const RigidTransform& t, Interp mode,
                        std::optional<std::int32_t> fill) {
  if (t.is_identity()) return vol;
  const std::int32_t f = fill.value_or(vol.dictionary.background_id());
  return detail::resample_voxel_map(vol, vol.geom, rigid_pull_map(vol.geom, t), mode, f);
}

} // namespace synthvox
