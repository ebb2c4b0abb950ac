#include "synthvox/patches.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>

#include "synthvox/rng.hpp"

namespace synthvox {

void PatchSpec::validate() const {
  for (const int s : size) {
    if (s < 1) throw ConfigError("patches: size must be positive");
  }
  if (count_per_volume < 1) throw ConfigError("patches: count_per_volume must be >= 1");
}

std::vector<Patch> sample_patches(const ScalarVolume& image, const LabelVolume& labels,
                                  const PatchSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (!image.geom.same_grid(labels.geom)) {
    throw GeometryError("sample_patches: image and labels do not share a grid");
  }
  for (int a = 0; a < 3; ++a) {
    if (labels.geom.dims[a] < spec.size[a]) {
      throw Error("sample_patches: volume smaller than patch along axis " + std::to_string(a));
    }
  }

  // Voxel lists per target-group structure actually present.
  std::map<int, int> to_target;
  for (const auto& [id, e] : labels.dictionary) to_target[id] = e.target_group;
  std::map<int, std::vector<std::size_t>> voxels_of;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    voxels_of[to_target.at(labels.data[i])].push_back(i);
  }
  for (const int excluded : spec.excluded_targets) voxels_of.erase(excluded);
  if (voxels_of.empty()) throw Error("sample_patches: no eligible target structures");

  std::vector<int> structures;
  for (const auto& [t, vs] : voxels_of) structures.push_back(t);

  const auto dims = labels.geom.dims;
  RngEngine eng(seed);
  std::vector<Patch> out;
  out.reserve(spec.count_per_volume);

  for (int p = 0; p < spec.count_per_volume; ++p) {
    const int structure =
        structures[uniform_int(eng, 0, static_cast<std::int64_t>(structures.size()) - 1)];
    const auto& vox = voxels_of.at(structure);
    const std::size_t pick =
        static_cast<std::size_t>(uniform_int(eng, 0, static_cast<std::int64_t>(vox.size()) - 1));
    const std::size_t flat = vox[pick];

    std::array<int, 3> center;
    center[0] = static_cast<int>(flat % dims[0]);
    center[1] = static_cast<int>((flat / dims[0]) % dims[1]);
    center[2] = static_cast<int>(flat / (static_cast<std::size_t>(dims[0]) * dims[1]));

    // Clamp the window so it stays inside the volume; the drawn voxel always
    // remains covered because size <= dims.
    std::array<int, 3> start;
    for (int a = 0; a < 3; ++a) {
      start[a] = std::clamp(center[a] - spec.size[a] / 2, 0, dims[a] - spec.size[a]);
    }

    Patch patch;
    patch.center = center;
    patch.target_id = structure;

    Geometry pg;
    pg.dims = spec.size;
    pg.spacing = labels.geom.spacing;
    pg.affine = labels.geom.affine;
    const Eigen::Vector3d shift{static_cast<double>(start[0]), static_cast<double>(start[1]),
                                static_cast<double>(start[2])};
    pg.affine.topRightCorner<3, 1>() += pg.affine.topLeftCorner<3, 3>() * shift;

    patch.image = ScalarVolume(pg);
    patch.labels = LabelVolume(pg);
    patch.labels.dictionary = labels.dictionary;
    for (int k = 0; k < spec.size[2]; ++k) {
      for (int j = 0; j < spec.size[1]; ++j) {
        const std::size_t src =
            labels.index(start[0], start[1] + j, start[2] + k);
        const std::size_t dst = patch.image.index(0, j, k);
        std::memcpy(&patch.image.data[dst], &image.data[src], spec.size[0] * sizeof(float));
        std::memcpy(&patch.labels.data[dst], &labels.data[src],
                    spec.size[0] * sizeof(std::int32_t));
      }
    }
    out.push_back(std::move(patch));
  }
  return out;
}

namespace {

constexpr char kMagic[8] = {'S', 'V', 'X', 'P', 'A', 'T', 'C', 'H'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("patch shard truncated");
  return v;
}

} // namespace

void write_patch_shard(const std::vector<Patch>& patches, const std::filesystem::path& path) {
  if (patches.empty()) throw Error("write_patch_shard: no patches");
  const auto size = patches.front().image.geom.dims;
  for (const Patch& p : patches) {
    if (p.image.geom.dims != size || p.labels.geom.dims != size) {
      throw Error("write_patch_shard: patches must share one size");
    }
    for (const auto v : p.labels.data) {
      if (v < 0 || v > 255) throw Error("write_patch_shard: label id does not fit in uint8");
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write patch shard: " + path.string());
  out.write(kMagic, 8);
  put<std::uint32_t>(out, 1);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(patches.size()));
  for (int a = 0; a < 3; ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(size[a]));
  put<std::uint32_t>(out, 0);

  std::vector<std::uint8_t> lab(static_cast<std::size_t>(size[0]) * size[1] * size[2]);
  for (const Patch& p : patches) {
    for (int a = 0; a < 3; ++a) put<std::int32_t>(out, p.center[a]);
    out.write(reinterpret_cast<const char*>(p.image.data.data()),
              static_cast<std::streamsize>(p.image.data.size() * sizeof(float)));
    for (std::size_t i = 0; i < lab.size(); ++i) {
      lab[i] = static_cast<std::uint8_t>(p.labels.data[i]);
    }
    out.write(reinterpret_cast<const char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
  }
  if (!out) throw IoError("patch shard write failed: " + path.string());
}

std::vector<Patch> read_patch_shard(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open patch shard: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("not a patch shard: " + path.string());
  }
  const auto version = get<std::uint32_t>(in);
  if (version != 1) throw FormatError("patch shard version " + std::to_string(version));
  const auto count = get<std::uint32_t>(in);
  std::array<int, 3> size;
  for (int a = 0; a < 3; ++a) size[a] = static_cast<int>(get<std::uint32_t>(in));
  get<std::uint32_t>(in); // reserved

  const std::size_t n = static_cast<std::size_t>(size[0]) * size[1] * size[2];
  Geometry geom = Geometry::axis_aligned(size);

  std::vector<Patch> out;
  out.reserve(count);
  std::vector<std::uint8_t> lab(n);
  for (std::uint32_t p = 0; p < count; ++p) {
    Patch patch;
    for (int a = 0; a < 3; ++a) patch.center[a] = get<std::int32_t>(in);
    patch.image = ScalarVolume(geom);
    in.read(reinterpret_cast<char*>(patch.image.data.data()),
            static_cast<std::streamsize>(n * sizeof(float)));
    in.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(n));
    if (!in) throw FormatError("patch shard truncated: " + path.string());
    patch.labels = LabelVolume(geom);
    for (std::size_t i = 0; i < n; ++i) patch.labels.data[i] = lab[i];
    patch.labels.ensure_dictionary();
    out.push_back(std::move(patch));
  }
  return out;
}

} // namespace synthvox
