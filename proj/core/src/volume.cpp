#include "synthvox/volume.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace synthvox {

void ScalarVolume::validate() const {
  if (data.size() != geom.voxel_count()) {
    throw GeometryError("scalar volume: value count does not match dims");
  }
  for (const float v : data) {
    if (!std::isfinite(v)) throw Error("scalar volume contains NaN/Inf");
  }
}

std::pair<float, float> ScalarVolume::min_max() const {
  auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  return {*lo, *hi};
}

LabelDictionary LabelDictionary::identity_for(const std::vector<int>& ids) {
  LabelDictionary d;
  for (const int id : ids) {
    d.entries_[id] = LabelInfo{"label_" + std::to_string(id), id, id};
  }
  return d;
}

const LabelInfo& LabelDictionary::info(int id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw Error("label dictionary: unknown id " + std::to_string(id));
  }
  return it->second;
}

int LabelDictionary::group_of(int id, GroupKind kind) const {
  const LabelInfo& e = info(id);
  return kind == GroupKind::generation ? e.generation_group : e.target_group;
}

namespace {
std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}
} // namespace

std::optional<int> LabelDictionary::find_by_name(std::string_view name) const {
  const std::string want = lower(name);
  for (const auto& [id, e] : entries_) {
    if (lower(e.name) == want) return id;
  }
  return std::nullopt;
}

std::vector<int> LabelDictionary::background_ids() const {
  std::vector<int> out;
  for (const auto& [id, e] : entries_) {
    const std::string n = lower(e.name);
    if (n == "background" || n == "bg" || n == "air") out.push_back(id);
  }
  return out;
}

int LabelDictionary::background_id() const {
  const auto named = background_ids();
  if (!named.empty()) return named.front();
  if (entries_.count(0)) return 0;
  if (!entries_.empty()) return entries_.begin()->first;
  return 0;
}

int LabelDictionary::max_id() const {
  return entries_.empty() ? -1 : entries_.rbegin()->first;
}

std::vector<int> LabelDictionary::ids() const {
  std::vector<int> out;
  out.reserve(entries_.size());
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

std::vector<int> LabelVolume::ids_present() const {
  std::set<std::int32_t> seen(data.begin(), data.end());
  return std::vector<int>(seen.begin(), seen.end());
}

void LabelVolume::validate() const {
  if (data.size() != geom.voxel_count()) {
    throw GeometryError("label volume: value count does not match dims");
  }
  for (const int id : ids_present()) {
    if (id < 0) throw Error("label volume contains negative id " + std::to_string(id));
    if (!dictionary.contains(id)) {
      throw Error("label volume: id " + std::to_string(id) + " missing from dictionary");
    }
  }
}

LabelVolume LabelVolume::project(GroupKind kind) const {
  LabelVolume out;
  out.geom = geom;
  out.data.resize(data.size());

  std::map<int, int> lut;
  for (const auto& [id, e] : dictionary) {
    lut[id] = kind == GroupKind::generation ? e.generation_group : e.target_group;
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto it = lut.find(data[i]);
    if (it == lut.end()) {
      throw Error("label projection: id " + std::to_string(data[i]) +
                  " missing from dictionary");
    }
    out.data[i] = it->second;
  }

  // Group ids name themselves via their own dictionary entry when present.
  std::set<int> gids;
  for (const auto& [id, g] : lut) gids.insert(g);
  for (const int g : gids) {
    LabelInfo e;
    e.name = dictionary.contains(g) ? dictionary.info(g).name : "group_" + std::to_string(g);
    e.generation_group = g;
    e.target_group = g;
    out.dictionary.set(g, e);
  }
  return out;
}

void LabelVolume::ensure_dictionary() {
  for (const int id : ids_present()) {
    if (!dictionary.contains(id)) {
      dictionary.set(id, LabelInfo{"label_" + std::to_string(id), id, id});
    }
  }
}

} // namespace synthvox
