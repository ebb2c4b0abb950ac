#include "synthvox/deform.hpp"

#include <cmath>

#include "synthvox/rng.hpp"

namespace synthvox {

void AffineSpec::validate() const {
  if (scale_range[0] > scale_range[1] || !(scale_range[0] > 0.0)) {
    throw ConfigError("affine: scale_range must be ordered and strictly positive");
  }
  if (rotation_range_deg[0] > rotation_range_deg[1]) {
    throw ConfigError("affine: rotation_range_deg not ordered");
  }
  if (translation_range_mm[0] > translation_range_mm[1]) {
    throw ConfigError("affine: translation_range_mm not ordered");
  }
}

void ElasticSpec::validate() const {
  if (control_points < 4) throw ConfigError("elastic: control_points must be >= 4");
  if (max_displacement_mm < 0.0) throw ConfigError("elastic: max_displacement_mm must be >= 0");
}

bool AffineScaleTransform::is_identity(double tol) const {
  return (scale - Eigen::Vector3d::Ones()).lpNorm<Eigen::Infinity>() <= tol &&
         rotation_deg.lpNorm<Eigen::Infinity>() <= tol &&
         translation_mm.lpNorm<Eigen::Infinity>() <= tol;
}

Eigen::Matrix4d AffineScaleTransform::matrix_about(const Eigen::Vector3d& center) const {
  RigidTransform r;
  r.rotation_deg = rotation_deg;
  const Eigen::Matrix3d lin = r.rotation_matrix() * scale.asDiagonal();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = lin;
  m.topRightCorner<3, 1>() = center + translation_mm - lin * center;
  return m;
}

AffineScaleTransform sample_affine(const AffineSpec& spec, std::uint64_t seed) {
  spec.validate();
  RngEngine eng(seed);
  AffineScaleTransform t;
  for (int a = 0; a < 3; ++a) t.scale[a] = uniform(eng, spec.scale_range[0], spec.scale_range[1]);
  for (int a = 0; a < 3; ++a) {
    t.rotation_deg[a] = uniform(eng, spec.rotation_range_deg[0], spec.rotation_range_deg[1]);
  }
  for (int a = 0; a < 3; ++a) {
    t.translation_mm[a] =
        uniform(eng, spec.translation_range_mm[0], spec.translation_range_mm[1]);
  }
  return t;
}

namespace {

// Uniform cubic B-spline basis for fractional offset t in [0, 1); weights are
// non-negative and sum to 1.
std::array<double, 4> bspline_weights(double t) {
  const double t2 = t * t, t3 = t2 * t;
  return {
      (1.0 - 3.0 * t + 3.0 * t2 - t3) / 6.0,
      (4.0 - 6.0 * t2 + 3.0 * t3) / 6.0,
      (1.0 + 3.0 * t + 3.0 * t2 - 3.0 * t3) / 6.0,
      t3 / 6.0,
  };
}

} // namespace

DeformationField::DeformationField(const Geometry& geom, int control_points,
                                   double max_displacement_mm)
    : dims_(geom.dims),
      control_points_(control_points),
      max_displacement_(max_displacement_mm) {
  if (control_points < 4) throw ConfigError("deformation field: control_points must be >= 4");
  for (int a = 0; a < 3; ++a) {
    lattice_step_[a] = (dims_[a] > 1 ? dims_[a] - 1 : 1) / static_cast<double>(control_points_ - 1);
  }
  control_.assign(static_cast<std::size_t>(control_points_) * control_points_ * control_points_ * 3,
                  0.0);
}

std::size_t DeformationField::cindex(int a, int b, int c) const {
  return 3 * (static_cast<std::size_t>(a) +
              static_cast<std::size_t>(control_points_) *
                  (static_cast<std::size_t>(b) + static_cast<std::size_t>(control_points_) * c));
}

Eigen::Vector3d DeformationField::control(int a, int b, int c) const {
  const std::size_t i = cindex(a, b, c);
  return {control_[i], control_[i + 1], control_[i + 2]};
}

void DeformationField::set_control(int a, int b, int c, const Eigen::Vector3d& d) {
  const std::size_t i = cindex(a, b, c);
  control_[i] = d[0];
  control_[i + 1] = d[1];
  control_[i + 2] = d[2];
}

double DeformationField::knot_voxel(int axis, int p) const {
  return p * lattice_step_[axis];
}

Eigen::Vector3d DeformationField::displacement_at_voxel(double i, double j, double k) const {
  const double pos[3] = {i, j, k};
  int base[3];
  std::array<double, 4> w[3];
  for (int a = 0; a < 3; ++a) {
    const double t = pos[a] / lattice_step_[a];
    double cell = std::floor(t);
    // Clamp so the 4-tap window stays defined at the grid edges.
    if (cell > control_points_ - 2) cell = control_points_ - 2;
    if (cell < 0) cell = 0;
    base[a] = static_cast<int>(cell) - 1;
    w[a] = bspline_weights(t - cell);
  }

  const int pmax = control_points_ - 1;
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  for (int dc = 0; dc < 4; ++dc) {
    const int c = std::clamp(base[2] + dc, 0, pmax);
    for (int db = 0; db < 4; ++db) {
      const int b = std::clamp(base[1] + db, 0, pmax);
      const double wbc = w[1][db] * w[2][dc];
      for (int da = 0; da < 4; ++da) {
        const int a = std::clamp(base[0] + da, 0, pmax);
        const double weight = w[0][da] * wbc;
        const std::size_t idx = cindex(a, b, c);
        out[0] += weight * control_[idx];
        out[1] += weight * control_[idx + 1];
        out[2] += weight * control_[idx + 2];
      }
    }
  }
  return out;
}

std::uint64_t DeformationField::content_hash() const {
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(control_.data()),
                                  control_.size() * sizeof(double)));
}

void DeformationField::validate() const {
  const double bound = max_displacement_ + 1e-9;
  for (int c = 0; c < control_points_; ++c) {
    for (int b = 0; b < control_points_; ++b) {
      for (int a = 0; a < control_points_; ++a) {
        if (control(a, b, c).norm() > bound) {
          throw Error("deformation field: control displacement exceeds max norm");
        }
      }
    }
  }
}

DeformationField sample_elastic(const Geometry& geom, const ElasticSpec& spec,
                                std::uint64_t seed) {
  spec.validate();
  DeformationField field(geom, spec.control_points, spec.max_displacement_mm);
  RngEngine eng(seed);
  const double m = spec.max_displacement_mm;
  for (int c = 0; c < spec.control_points; ++c) {
    for (int b = 0; b < spec.control_points; ++b) {
      for (int a = 0; a < spec.control_points; ++a) {
        Eigen::Vector3d d{uniform(eng, -m, m), uniform(eng, -m, m), uniform(eng, -m, m)};
        const double norm = d.norm();
        if (norm > m && norm > 0.0) d *= m / norm;
        field.set_control(a, b, c, d);
      }
    }
  }
  return field;
}

namespace {

template <typename Vol, typename Sampler>
void warp_into(Vol& out, const Eigen::Matrix3d& w2v_lin, const DeformationField& field,
               Sampler sampler) {
  std::size_t idx = 0;
  for (int k = 0; k < out.geom.dims[2]; ++k) {
    for (int j = 0; j < out.geom.dims[1]; ++j) {
      for (int i = 0; i < out.geom.dims[0]; ++i, ++idx) {
        const Eigen::Vector3d d = field.displacement_at_voxel(i, j, k);
        // Sampling position is world(v) + d; input and output share the grid,
        // so in voxel coordinates that is v + A^-1 d.
        const Eigen::Vector3d dv = w2v_lin * d;
        out.data[idx] = sampler(i + dv[0], j + dv[1], k + dv[2]);
      }
    }
  }
}

} // namespace

ScalarVolume warp(const ScalarVolume& vol, const DeformationField& field, Interp mode,
                  float fill) {
  if (field.grid_dims() != vol.geom.dims) {
    throw GeometryError("warp: field was built for a different grid");
  }
  const Eigen::Matrix3d w2v_lin =
      Eigen::Matrix3d(vol.geom.world_to_voxel().topLeftCorner<3, 3>());
  ScalarVolume out(vol.geom);
  if (mode == Interp::trilinear) {
    warp_into(out, w2v_lin, field, [&](double x, double y, double z) {
      return detail::sample_trilinear(vol, x, y, z, fill);
    });
  } else {
    warp_into(out, w2v_lin, field, [&](double x, double y, double z) {
      return detail::sample_nearest(vol, x, y, z, fill);
    });
  }
  return out;
}

LabelVolume warp(const LabelVolume& vol, const DeformationField& field, Interp mode,
                 std::optional<std::int32_t> fill) {
  if (mode != Interp::nearest) throw Error("label volumes require nearest-neighbor interpolation");
  if (field.grid_dims() != vol.geom.dims) {
    throw GeometryError("warp: field was built for a different grid");
  }
  const std::int32_t f = fill.value_or(vol.dictionary.background_id());
  const Eigen::Matrix3d w2v_lin =
      Eigen::Matrix3d(vol.geom.world_to_voxel().topLeftCorner<3, 3>());
  LabelVolume out(vol.geom);
  warp_into(out, w2v_lin, field, [&](double x, double y, double z) {
    return detail::sample_nearest(vol, x, y, z, f);
  });
  out.dictionary = vol.dictionary;
  return out;
}

ScalarVolume apply_affine(const ScalarVolume& vol, const AffineScaleTransform& t, Interp mode,
                          float fill) {
  if (t.is_identity()) return vol;
  const Eigen::Matrix4d fwd = t.matrix_about(vol.geom.world_center());
  const Eigen::Matrix4d map = vol.geom.world_to_voxel() * fwd.inverse() * vol.geom.affine;
  return detail::resample_voxel_map(vol, vol.geom, map, mode, fill);
}

LabelVolume apply_affine(const LabelVolume& vol, const AffineScaleTransform& t, Interp mode,
                         std::optional<std::int32_t> fill) {
  if (t.is_identity()) return vol;
  const std::int32_t f = fill.value_or(vol.dictionary.background_id());
  const Eigen::Matrix4d fwd = t.matrix_about(vol.geom.world_center());
  const Eigen::Matrix4d map = vol.geom.world_to_voxel() * fwd.inverse() * vol.geom.affine;
  return detail::resample_voxel_map(vol, vol.geom, map, mode, f);
}

} // namespace synthvox
