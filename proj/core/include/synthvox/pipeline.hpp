#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "synthvox/manifest.hpp"
#include "synthvox/volume.hpp"

namespace synthvox {

/// In-memory resources for one training subject. Subdivided label maps are
/// prepared up front (loaded, or computed once from the intensities) so the
/// per-sample pipeline stays a pure function.
struct SubjectData {
  std::string id;
  LabelVolume labels;
  std::map<int, LabelVolume> subdivided; // N -> WM-subdivided label map
  std::optional<ScalarVolume> image;     // real image (DataT2 / subdivision source)
};

/// Loads the subject volumes and, when the recipe needs WM inhomogeneity,
/// ensures a subdivided map exists for every N in the config n_set.
SubjectData load_subject(const SubjectInput& input, const GenerationConfig& cfg);

/// Scheduler-independent per-sample seed: hash(config seed, subject, index).
std::uint64_t sample_seed_for(std::uint64_t base_seed, std::string_view subject_id, int index);

struct GeneratedSample {
  ScalarVolume image;
  LabelVolume labels; // target-group ids
  SampleRecord record;
};

/// The full generative chain for one sample: optional WM subdivision, affine
/// + elastic label deformation, per-label Gaussian synthesis, bias field,
/// optional k-space motion (with background zeroed first), noise, min-max
/// normalization. For DataT2-aug the real image takes the synthetic path's
/// place and gamma replaces contrast/motion.
GeneratedSample generate_sample(const SubjectData& subject, const GenerationConfig& cfg,
                                std::uint64_t sample_seed, int sample_index);

/// Shared-field augmentation of a real image: affine + elastic (image
/// trilinear, labels nearest, same draws), bias, noise, gamma, normalize.
struct DataT2Result {
  ScalarVolume image;
  LabelVolume labels;
};
DataT2Result dataT2_augment(const ScalarVolume& image, const LabelVolume& labels,
                            const GenerationConfig& cfg, std::uint64_t seed,
                            SampleRecord* record = nullptr);

struct DatasetResult {
  Manifest manifest;
  std::filesystem::path manifest_path;
  int failure_count = 0;
};

/// samples_per_subject x |subjects| samples into out_dir, parallel over a
/// worker pool; per-sample failures become error records and the run
/// continues.
DatasetResult generate_dataset(const GenerationConfig& cfg, const std::filesystem::path& out_dir,
                               int jobs);

/// Regenerate one manifest record from its recorded seed; bit-identical to
/// the original sample.
GeneratedSample replay_sample(const Manifest& manifest, const SampleRecord& record);

} // namespace synthvox
