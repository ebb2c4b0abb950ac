#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "synthvox/volume.hpp"

namespace synthvox {

struct PatchSpec {
  std::array<int, 3> size{128, 128, 128};
  int count_per_volume = 8;
  std::vector<int> excluded_targets; // target-group ids never drawn
  void validate() const;
};

struct Patch {
  ScalarVolume image;
  LabelVolume labels;
  std::array<int, 3> center;
  int target_id = 0; // the structure this patch is guaranteed to contain
};

/// Structure-balanced sampling: draw a target-group structure uniformly from
/// those present, then a voxel uniformly inside it; the patch window centers
/// there, clamped to the volume bounds. Errors when the volume is smaller
/// than the patch on any axis.
std::vector<Patch> sample_patches(const ScalarVolume& image, const LabelVolume& labels,
                                  const PatchSpec& spec, std::uint64_t seed);

/// Packed little-endian shard:
///   char[8]  magic "SVXPATCH"
///   u32      version (1)
///   u32      count
///   u32[3]   patch size
///   u32      reserved (0)
/// then per patch: i32[3] center, f32[size^3] image, u8[size^3] labels.
/// Label ids must fit in uint8.
void write_patch_shard(const std::vector<Patch>& patches, const std::filesystem::path& path);
std::vector<Patch> read_patch_shard(const std::filesystem::path& path);

} // namespace synthvox
