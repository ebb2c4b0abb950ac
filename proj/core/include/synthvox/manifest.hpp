#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthvox/config.hpp"
#include "synthvox/motion.hpp"
#include "synthvox/synth.hpp"

namespace synthvox {

struct AffineDraw {
  std::array<double, 3> scale{1, 1, 1};
  std::array<double, 3> rotation_deg{0, 0, 0};
  std::array<double, 3> translation_mm{0, 0, 0};
};

/// Everything needed to reproduce one sample bit-identically: the derived
/// seed plus all drawn parameters (recorded for inspection; replay re-derives
/// them from the seed).
struct SampleRecord {
  std::string sample_id;
  std::string source_subject;
  Recipe recipe = Recipe::Synth;
  std::uint64_t sample_seed = 0;
  int sample_index = 0;

  bool motion_fired = false;
  bool inh_fired = false;
  std::optional<int> n_chosen;

  std::map<int, GaussianParams> contrast; // per generation-group id
  std::optional<AffineDraw> affine;
  std::string elastic_control_hash; // fnv1a64 of the control grid, hex
  std::vector<double> bias_coefficients;
  std::optional<double> noise_sigma;
  std::optional<double> gamma;
  std::optional<MotionTrajectory> trajectory;

  std::string image_path;  // relative to the manifest directory
  std::string labels_path;
  std::optional<std::string> error; // set on failed samples
};

/// JSON-lines file: a header record carrying the full config, then one
/// record per sample.
struct Manifest {
  int schema_version = 1;
  GenerationConfig config;
  std::vector<SampleRecord> records;
};

void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

} // namespace synthvox
