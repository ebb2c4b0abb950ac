#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synthvox/deform.hpp"
#include "synthvox/motion.hpp"
#include "synthvox/synth.hpp"

namespace synthvox {

enum class Recipe { Synth, SynthMot, SynthInh, SynthMotInh, DataT2Aug };

std::string to_string(Recipe r);
Recipe recipe_from_string(const std::string& s);

struct MotionConfig {
  double probability = 0.0;
  MotionSpec spec;
};

struct InhomogeneityConfig {
  double probability = 0.0;
  std::vector<int> n_set{2, 3, 4, 5, 6};
};

struct GammaSpec {
  std::array<double, 2> log_range{-0.3, 0.3}; // gamma = exp(beta)
};

struct SubjectInput {
  std::string id;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> dictionary;  // sidecar override
  std::optional<std::filesystem::path> intensities; // real image (DataT2 / subdivision)
  std::map<int, std::filesystem::path> subdivided;  // N -> precomputed label map
};

/// Every random range and probability of the generative model, plus the
/// subject list. Loaded from a strict JSON document (unknown keys are
/// errors); subject paths resolve relative to the config file.
struct GenerationConfig {
  int schema_version = 1;
  Recipe recipe = Recipe::Synth;
  std::uint64_t seed = 0;
  int samples_per_subject = 1;
  bool compress_output = true;

  ContrastPrior contrast;
  AffineSpec affine;
  ElasticSpec elastic;
  BiasFieldSpec bias;
  NoiseSpec noise;
  MotionConfig motion;
  InhomogeneityConfig inhomogeneity;
  GammaSpec gamma;

  std::vector<SubjectInput> subjects;

  bool motion_allowed() const {
    return recipe == Recipe::SynthMot || recipe == Recipe::SynthMotInh;
  }
  bool inhomogeneity_allowed() const {
    return recipe == Recipe::SynthInh || recipe == Recipe::SynthMotInh;
  }

  /// Recipe gating and range checks; throws ConfigError.
  void validate() const;
};

GenerationConfig load_config(const std::filesystem::path& path);
GenerationConfig config_from_json_string(const std::string& text);
std::string config_to_json_string(const GenerationConfig& cfg);

} // namespace synthvox
