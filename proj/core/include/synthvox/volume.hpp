#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthvox/errors.hpp"
#include "synthvox/geometry.hpp"

namespace synthvox {

/// Dense 3D grid, x-fastest (NIfTI order). Volumes are immutable by
/// convention once an operation returns them; operations are pure functions.
template <typename T>
struct Grid3 {
  Geometry geom;
  std::vector<T> data;

  Grid3() = default;
  explicit Grid3(Geometry g, T fill = T{})
      : geom(std::move(g)), data(geom.voxel_count(), fill) {}

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(geom.dims[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(geom.dims[1]) * k);
  }

  T& at(int i, int j, int k) { return data[index(i, j, k)]; }
  const T& at(int i, int j, int k) const { return data[index(i, j, k)]; }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < geom.dims[0] && j < geom.dims[1] &&
           k < geom.dims[2];
  }
};

struct ScalarVolume : Grid3<float> {
  using Grid3<float>::Grid3;

  /// Throws when any value is NaN/Inf or the buffer size disagrees with dims.
  void validate() const;

  std::pair<float, float> min_max() const;
};

struct LabelInfo {
  std::string name;
  int generation_group = 0;
  int target_group = 0;
};

enum class GroupKind { generation, target };

/// id -> {name, generation group, target group}. Group ids live in the label
/// id space; projections use the entry of the group id itself for naming when
/// present.
class LabelDictionary {
public:
  LabelDictionary() = default;

  /// name "label_<id>", both groups mapping to the id itself.
  static LabelDictionary identity_for(const std::vector<int>& ids);

  bool contains(int id) const { return entries_.count(id) != 0; }
  const LabelInfo& info(int id) const;
  void set(int id, LabelInfo info) { entries_[id] = std::move(info); }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  int group_of(int id, GroupKind kind) const;

  /// Case-insensitive exact name lookup.
  std::optional<int> find_by_name(std::string_view name) const;

  /// Ids whose name marks signal-free space: background / bg / air.
  std::vector<int> background_ids() const;

  /// Preferred fill id: first background-named id, else 0 when present,
  /// else the smallest id.
  int background_id() const;

  int max_id() const;
  std::vector<int> ids() const;

private:
  std::map<int, LabelInfo> entries_;
};

struct LabelVolume : Grid3<std::int32_t> {
  using Grid3<std::int32_t>::Grid3;

  LabelDictionary dictionary;

  /// Sorted unique ids occurring in the voxel data.
  std::vector<int> ids_present() const;

  /// Throws when a voxel id is negative or missing from the dictionary.
  void validate() const;

  /// Map every voxel through the generation or target group and rebuild the
  /// dictionary over the group ids.
  LabelVolume project(GroupKind kind) const;

  /// Ensure the dictionary covers all voxel ids, adding identity entries.
  void ensure_dictionary();
};

} // namespace synthvox
