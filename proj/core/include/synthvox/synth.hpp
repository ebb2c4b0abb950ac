#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "synthvox/volume.hpp"

namespace synthvox {

struct ContrastPrior {
  std::array<double, 2> mean_range{0.0, 1.0};
  std::array<double, 2> std_range{0.02, 0.1};
  void validate() const;
};

struct BiasFieldSpec {
  int order = 3;
  double magnitude = 0.5;
  void validate() const;
};

struct NoiseSpec {
  std::array<double, 2> std_range{5e-3, 0.1};
  void validate() const;
};

struct GaussianParams {
  double mean = 0.0;
  double stddev = 0.0;
};

struct SynthesisResult {
  ScalarVolume image;
  /// Drawn (mean, std) per generation-group id, for the manifest.
  std::map<int, GaussianParams> drawn;
};

/// One (mean, std) pair per generation-group label, mean ~ U[mean_range] and
/// std ~ U[std_range]; every voxel of the group is an i.i.d. Gaussian draw.
SynthesisResult labels_to_image(const LabelVolume& labels, const ContrastPrior& prior,
                                std::uint64_t seed);

struct BiasField {
  ScalarVolume field;
  /// Polynomial coefficients in fixed nested (i, j, k) order, i + j + k <= order.
  std::vector<double> coefficients;
};

/// Multiplicative field exp(P(u, v, w)) with coefficients ~ U[-magnitude,
/// magnitude] and (u, v, w) the voxel coordinates normalized to [-1, 1].
/// Strictly positive by construction.
BiasField sample_bias_field(const Geometry& geom, const BiasFieldSpec& spec, std::uint64_t seed);

ScalarVolume apply_bias(const ScalarVolume& image, const BiasField& bias);

struct NoiseResult {
  ScalarVolume image;
  double sigma = 0.0;
};

/// Adds i.i.d. Normal(0, sigma) with sigma ~ U[std_range].
NoiseResult add_noise(const ScalarVolume& image, const NoiseSpec& spec, std::uint64_t seed);

/// Affine rescale to [0, 1]. Constant input is an error.
ScalarVolume minmax_normalize(const ScalarVolume& image);

} // namespace synthvox
