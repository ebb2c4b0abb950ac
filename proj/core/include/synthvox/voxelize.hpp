#pragma once

#include <cstddef>

#include "synthvox/mesh.hpp"
#include "synthvox/volume.hpp"

namespace synthvox {

/// ScalarVolume constrained to [0, 1]: fraction of each voxel inside a
/// surface.
struct PartialVolumeMap {
  ScalarVolume values;
  void validate() const;
};

/// Fraction of supersample^3 sub-points strictly inside the mesh, decided by
/// ray parity along +x (in voxel space). Rays that graze an edge or vertex
/// are re-cast from three jittered origins and majority-voted.
PartialVolumeMap voxelize_pv(const TriangleMesh& mesh, const Geometry& geom,
                             int supersample = 4);

struct GmPvResult {
  PartialVolumeMap pv;
  std::size_t clamped_voxels = 0; // where pial PV < white PV (local inversion)
};

/// GM partial volume = clamp(PV(pial) - PV(white), 0, 1).
GmPvResult gm_from_surfaces(const TriangleMesh& white, const TriangleMesh& pial,
                            const Geometry& geom, int supersample = 4);

/// Replace the GM of `base` by {pv_gm > 0.5}; former GM voxels that drop out
/// become WM when inside the white surface, else CSF. Only GM/WM/CSF change.
LabelVolume splice_gm(const LabelVolume& base, const PartialVolumeMap& pv_gm,
                      const PartialVolumeMap& pv_white);

/// Sum of PV values times the voxel volume, in mm^3.
double pv_integral_mm3(const PartialVolumeMap& pv);

} // namespace synthvox
