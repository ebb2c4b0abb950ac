#pragma once

#include <filesystem>
#include <variant>

#include "synthvox/volume.hpp"

namespace synthvox {

/// Reads a 3D NIfTI-1 single-file volume (.nii or .nii.gz, little-endian).
/// Integer datatypes (uint8/int16/int32) load as LabelVolume with an identity
/// dictionary; float32 loads as ScalarVolume. Anything else is rejected.
std::variant<ScalarVolume, LabelVolume> read_nifti(const std::filesystem::path& path);

/// Convenience wrappers that throw FormatError on the wrong variant.
ScalarVolume read_scalar_nifti(const std::filesystem::path& path);
LabelVolume read_label_nifti(const std::filesystem::path& path);

void write_nifti(const ScalarVolume& vol, const std::filesystem::path& path);

/// Labels keep an integer datatype: uint8 when ids fit, else int16/int32.
void write_nifti(const LabelVolume& vol, const std::filesystem::path& path);

/// Label dictionary sidecar (JSON): {"schema_version":1, "labels": {"<id>":
/// {"name":..., "generation_group":..., "target_group":...}, ...}}.
LabelDictionary load_label_dictionary(const std::filesystem::path& path);
void save_label_dictionary(const LabelDictionary& dict, const std::filesystem::path& path);

/// foo.nii / foo.nii.gz -> foo.labels.json
std::filesystem::path sidecar_path_for(const std::filesystem::path& volume_path);

} // namespace synthvox
