#pragma once

#include <cstdint>

#include "synthvox/gmm.hpp"
#include "synthvox/volume.hpp"

namespace synthvox {

/// Split a label into n_components new generation-group ids by EM-clustering
/// the intensities inside its mask; max-posterior assignment per voxel. The
/// new ids all keep the original label's target group, so the target-group
/// projection of the result equals the input exactly.
LabelVolume subdivide_label(const LabelVolume& labels, const ScalarVolume& intensities,
                            int target_label, int n_components, std::uint64_t seed,
                            GmmFit* fit_out = nullptr);

/// Brain labels win inside the brain; outside, head labels apply and head
/// background becomes air. Head ids are remapped above the brain ids and all
/// map to a single fresh "Head" target-group id.
LabelVolume fuse_head_labels(const LabelVolume& brain, const LabelVolume& head);

/// CSF and Ventricles collapse to one id (the CSF id, renamed
/// "CSF+Ventricles"). Idempotent; errors when either name is absent.
LabelVolume merge_for_eval(const LabelVolume& labels);

} // namespace synthvox
