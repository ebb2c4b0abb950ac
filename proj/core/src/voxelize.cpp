#include "synthvox/voxelize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace synthvox {

void PartialVolumeMap::validate() const {
  values.validate();
  for (const float v : values.data) {
    if (v < 0.0f || v > 1.0f) throw Error("partial volume map value outside [0, 1]");
  }
}

namespace {

struct VoxelTriangle {
  // Vertices in voxel coordinates.
  Eigen::Vector3d v0, v1, v2;
  double min_y, max_y, min_z, max_z;
};

struct Crossing {
  double x;
  bool degenerate;
};

// Crossings of the +x ray at (y, z) with a triangle, via 2D barycentrics in
// the yz projection. Flags grazing hits (near an edge/vertex, or a triangle
// nearly parallel to the ray) as degenerate.
bool ray_hit(const VoxelTriangle& t, double y, double z, Crossing& out) {
  constexpr double kEps = 1e-9;
  const double d1y = t.v1[1] - t.v0[1], d1z = t.v1[2] - t.v0[2];
  const double d2y = t.v2[1] - t.v0[1], d2z = t.v2[2] - t.v0[2];
  const double denom = d1y * d2z - d2y * d1z;
  const double py = y - t.v0[1], pz = z - t.v0[2];

  if (std::abs(denom) < kEps) {
    // Projected triangle is (nearly) a line: degenerate if the ray is close.
    if (y >= t.min_y - kEps && y <= t.max_y + kEps && z >= t.min_z - kEps &&
        z <= t.max_z + kEps) {
      out.degenerate = true;
      out.x = t.v0[0];
      return true;
    }
    return false;
  }

  const double b1 = (py * d2z - d2y * pz) / denom;
  const double b2 = (d1y * pz - py * d1z) / denom;
  const double b0 = 1.0 - b1 - b2;
  const double lo = std::min({b0, b1, b2});
  if (lo < -kEps) return false;

  out.x = b0 * t.v0[0] + b1 * t.v1[0] + b2 * t.v2[0];
  out.degenerate = lo < kEps; // grazing an edge or vertex
  return true;
}

class TriangleBuckets {
public:
  TriangleBuckets(const std::vector<VoxelTriangle>& tris, const std::array<int, 3>& dims)
      : dims_(dims), buckets_(static_cast<std::size_t>(dims[1]) * dims[2]) {
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto& tri = tris[t];
      const int y0 = clamp_y(static_cast<int>(std::floor(tri.min_y + 0.5)) - 1);
      const int y1 = clamp_y(static_cast<int>(std::floor(tri.max_y + 0.5)) + 1);
      const int z0 = clamp_z(static_cast<int>(std::floor(tri.min_z + 0.5)) - 1);
      const int z1 = clamp_z(static_cast<int>(std::floor(tri.max_z + 0.5)) + 1);
      for (int z = z0; z <= z1; ++z) {
        for (int y = y0; y <= y1; ++y) {
          buckets_[static_cast<std::size_t>(y) + static_cast<std::size_t>(dims_[1]) * z]
              .push_back(static_cast<int>(t));
        }
      }
    }
  }

  const std::vector<int>& at(int y, int z) const {
    return buckets_[static_cast<std::size_t>(clamp_y(y)) +
                    static_cast<std::size_t>(dims_[1]) * clamp_z(z)];
  }

private:
  int clamp_y(int y) const { return std::clamp(y, 0, dims_[1] - 1); }
  int clamp_z(int z) const { return std::clamp(z, 0, dims_[2] - 1); }

  std::array<int, 3> dims_;
  std::vector<std::vector<int>> buckets_;
};

// Parity per sub-x position for one ray. Returns false when a degenerate hit
// makes the parity unreliable.
bool cast_ray(const std::vector<VoxelTriangle>& tris, const TriangleBuckets& buckets, double y,
              double z, const std::vector<double>& sub_x, std::vector<std::uint8_t>& inside) {
  std::vector<double> xs;
  for (const int t : buckets.at(static_cast<int>(std::floor(y + 0.5)),
                                static_cast<int>(std::floor(z + 0.5)))) {
    Crossing c;
    if (ray_hit(tris[t], y, z, c)) {
      if (c.degenerate) return false;
      xs.push_back(c.x);
    }
  }
  std::sort(xs.begin(), xs.end());

  inside.assign(sub_x.size(), 0);
  std::size_t cross = 0;
  for (std::size_t i = 0; i < sub_x.size(); ++i) {
    while (cross < xs.size() && xs[cross] < sub_x[i]) ++cross;
    // Odd number of crossings behind the point means inside.
    inside[i] = static_cast<std::uint8_t>((xs.size() - cross) & 1);
  }
  return true;
}

} // namespace

PartialVolumeMap voxelize_pv(const TriangleMesh& mesh, const Geometry& geom, int supersample) {
  if (supersample < 1) throw Error("voxelize_pv: supersample must be >= 1");
  geom.validate();
  mesh.validate_closed();

  // Work in voxel coordinates; parity is affine-invariant.
  const Eigen::Matrix4d w2v = geom.world_to_voxel();
  const Eigen::Matrix3d lin = w2v.topLeftCorner<3, 3>();
  const Eigen::Vector3d off = w2v.topRightCorner<3, 1>();

  std::vector<VoxelTriangle> tris;
  tris.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    VoxelTriangle t;
    t.v0 = lin * mesh.vertices[f[0]] + off;
    t.v1 = lin * mesh.vertices[f[1]] + off;
    t.v2 = lin * mesh.vertices[f[2]] + off;
    t.min_y = std::min({t.v0[1], t.v1[1], t.v2[1]});
    t.max_y = std::max({t.v0[1], t.v1[1], t.v2[1]});
    t.min_z = std::min({t.v0[2], t.v1[2], t.v2[2]});
    t.max_z = std::max({t.v0[2], t.v1[2], t.v2[2]});
    tris.push_back(t);
  }

  const TriangleBuckets buckets(tris, geom.dims);
  const int S = supersample;
  const double inv_s3 = 1.0 / (static_cast<double>(S) * S * S);

  // Sub-point offsets within a voxel, centered on the voxel coordinate.
  std::vector<double> sub_off(S);
  for (int s = 0; s < S; ++s) sub_off[s] = -0.5 + (s + 0.5) / S;

  std::vector<double> sub_x(static_cast<std::size_t>(geom.dims[0]) * S);
  for (int i = 0; i < geom.dims[0]; ++i) {
    for (int s = 0; s < S; ++s) sub_x[static_cast<std::size_t>(i) * S + s] = i + sub_off[s];
  }

  PartialVolumeMap out;
  out.values = ScalarVolume(geom, 0.0f);
  std::vector<std::uint8_t> inside, vote_a, vote_b, vote_c;

  for (int k = 0; k < geom.dims[2]; ++k) {
    for (int sz = 0; sz < S; ++sz) {
      const double z = k + sub_off[sz];
      for (int j = 0; j < geom.dims[1]; ++j) {
        for (int sy = 0; sy < S; ++sy) {
          const double y = j + sub_off[sy];
          bool ok = cast_ray(tris, buckets, y, z, sub_x, inside);
          if (!ok) {
            // Deterministic jitters; majority vote across three rays.
            constexpr double kJ = 1e-6;
            const bool a = cast_ray(tris, buckets, y + kJ, z + kJ, sub_x, vote_a);
            const bool b = cast_ray(tris, buckets, y - kJ, z + 2 * kJ, sub_x, vote_b);
            const bool c = cast_ray(tris, buckets, y + 2 * kJ, z - kJ, sub_x, vote_c);
            if (!a || !b || !c) {
              // Extremely unlucky; fall back to the largest jitter that worked.
              if (a) inside = vote_a;
              else if (b) inside = vote_b;
              else if (c) inside = vote_c;
              else inside.assign(sub_x.size(), 0);
            } else {
              inside.resize(sub_x.size());
              for (std::size_t i = 0; i < sub_x.size(); ++i) {
                inside[i] = static_cast<std::uint8_t>((vote_a[i] + vote_b[i] + vote_c[i]) >= 2);
              }
            }
          }
          for (int i = 0; i < geom.dims[0]; ++i) {
            int count = 0;
            for (int s = 0; s < S; ++s) count += inside[static_cast<std::size_t>(i) * S + s];
            out.values.at(i, j, k) += static_cast<float>(count * inv_s3);
          }
        }
      }
    }
  }
  return out;
}

GmPvResult gm_from_surfaces(const TriangleMesh& white, const TriangleMesh& pial,
                            const Geometry& geom, int supersample) {
  const PartialVolumeMap pv_white = voxelize_pv(white, geom, supersample);
  const PartialVolumeMap pv_pial = voxelize_pv(pial, geom, supersample);

  GmPvResult res;
  res.pv.values = ScalarVolume(geom);
  for (std::size_t i = 0; i < res.pv.values.data.size(); ++i) {
    const float d = pv_pial.values.data[i] - pv_white.values.data[i];
    if (d < 0.0f) ++res.clamped_voxels;
    res.pv.values.data[i] = std::clamp(d, 0.0f, 1.0f);
  }
  return res;
}

LabelVolume splice_gm(const LabelVolume& base, const PartialVolumeMap& pv_gm,
                      const PartialVolumeMap& pv_white) {
  if (!base.geom.same_grid(pv_gm.values.geom) || !base.geom.same_grid(pv_white.values.geom)) {
    throw GeometryError("splice_gm: partial volume maps do not share the base grid");
  }
  const auto gm = base.dictionary.find_by_name("GM");
  const auto wm = base.dictionary.find_by_name("WM");
  const auto csf = base.dictionary.find_by_name("CSF");
  if (!gm || !wm || !csf) {
    throw Error("splice_gm: dictionary must name GM, WM and CSF labels");
  }

  LabelVolume out = base;
  for (std::size_t i = 0; i < base.data.size(); ++i) {
    const std::int32_t v = base.data[i];
    // All structures except GM/WM/CSF stay untouched.
    if (v != *gm && v != *wm && v != *csf) continue;
    if (pv_gm.values.data[i] > 0.5f) {
      out.data[i] = *gm;
    } else if (v == *gm) {
      // Former GM voxel freed by the surfaces: adjacent label by geometry.
      out.data[i] = pv_white.values.data[i] > 0.5f ? *wm : *csf;
    }
  }
  return out;
}

double pv_integral_mm3(const PartialVolumeMap& pv) {
  const double voxel_volume =
      std::abs(pv.values.geom.affine.topLeftCorner<3, 3>().determinant());
  double acc = 0.0;
  for (const float v : pv.values.data) acc += v;
  return acc * voxel_volume;
}

} // namespace synthvox
