#include "synthvox/label_ops.hpp"

#include <algorithm>
#include <vector>

namespace synthvox {

LabelVolume subdivide_label(const LabelVolume& labels, const ScalarVolume& intensities,
                            int target_label, int n_components, std::uint64_t seed,
                            GmmFit* fit_out) {
  if (n_components < 2 || n_components > 6) {
    throw ConfigError("subdivide_label: n_components must be in [2, 6]");
  }
  if (!labels.geom.same_grid(intensities.geom)) {
    throw GeometryError("subdivide_label: intensities do not share the label grid");
  }
  labels.validate();

  std::vector<std::size_t> mask;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    if (labels.data[i] == target_label) mask.push_back(i);
  }
  if (mask.empty()) {
    throw Error("subdivide_label: label " + std::to_string(target_label) + " absent");
  }

  std::vector<double> values(mask.size());
  for (std::size_t m = 0; m < mask.size(); ++m) values[m] = intensities.data[mask[m]];

  const GmmFit fit = fit_gmm_1d(values, n_components, 1e-6, 200, seed);
  if (fit_out) *fit_out = fit;

  const int base_id = labels.dictionary.max_id() + 1;
  const LabelInfo& original = labels.dictionary.info(target_label);

  LabelVolume out = labels;
  for (std::size_t m = 0; m < mask.size(); ++m) {
    out.data[mask[m]] = base_id + fit.model.assign(values[m]);
  }
  for (int c = 0; c < n_components; ++c) {
    LabelInfo e;
    e.name = original.name + "_sub" + std::to_string(c + 1);
    e.generation_group = base_id + c; // distinct intensity distributions
    e.target_group = original.target_group;
    out.dictionary.set(base_id + c, e);
  }
  return out;
}

LabelVolume fuse_head_labels(const LabelVolume& brain, const LabelVolume& head) {
  if (!brain.geom.same_grid(head.geom)) {
    throw GeometryError("fuse_head_labels: brain and head grids differ");
  }
  brain.validate();
  head.validate();

  const int brain_bg = brain.dictionary.background_id();
  const int head_bg = head.dictionary.background_id();
  const auto air = head.dictionary.find_by_name("air");
  if (!air) throw Error("fuse_head_labels: head map has no \"air\" label");

  // Head classes move above the brain id range; one fresh id groups them all
  // as the segmentation target.
  const int base_id = std::max(brain.dictionary.max_id(), 0) + 1;
  std::map<int, int> head_remap;
  int next = base_id;
  for (const auto& [id, e] : head.dictionary) {
    if (id == head_bg) continue;
    head_remap[id] = next++;
  }
  const int head_group_id = next;

  LabelVolume out;
  out.geom = brain.geom;
  out.data.resize(brain.data.size());
  out.dictionary = brain.dictionary;
  for (const auto& [id, e] : head.dictionary) {
    if (id == head_bg) continue;
    LabelInfo info = e;
    info.generation_group = head_remap[id];
    info.target_group = head_group_id;
    out.dictionary.set(head_remap[id], info);
  }
  out.dictionary.set(head_group_id, LabelInfo{"Head", head_group_id, head_group_id});

  const int air_remapped = head_remap[*air];
  for (std::size_t i = 0; i < brain.data.size(); ++i) {
    if (brain.data[i] != brain_bg) {
      out.data[i] = brain.data[i]; // brain always wins inside the brain
    } else if (head.data[i] != head_bg) {
      out.data[i] = head_remap[head.data[i]];
    } else {
      out.data[i] = air_remapped; // missing voxels outside the brain
    }
  }
  return out;
}

LabelVolume merge_for_eval(const LabelVolume& labels) {
  auto csf = labels.dictionary.find_by_name("CSF+Ventricles");
  if (!csf) csf = labels.dictionary.find_by_name("CSF");
  auto vent = labels.dictionary.find_by_name("Ventricles");
  if (!vent) vent = labels.dictionary.find_by_name("Ventricle");
  if (!csf) throw Error("merge_for_eval: no CSF label in dictionary");
  if (!vent) throw Error("merge_for_eval: no Ventricles label in dictionary");

  LabelVolume out = labels;
  for (auto& v : out.data) {
    if (v == *vent) v = *csf;
  }

  LabelInfo merged = out.dictionary.info(*csf);
  merged.name = "CSF+Ventricles";
  out.dictionary.set(*csf, merged);
  // The Ventricles entry stays so the merge is idempotent, but its groups now
  // point at the merged id.
  LabelInfo vent_info = out.dictionary.info(*vent);
  vent_info.generation_group = merged.generation_group;
  vent_info.target_group = merged.target_group;
  out.dictionary.set(*vent, vent_info);
  return out;
}

} // namespace synthvox
