#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace synthvox {

/// 1D Gaussian mixture in canonical form: means sorted ascending.
struct GmmModel {
  int components = 0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> stds;

  void validate() const;

  /// Posterior responsibilities of x under each component.
  std::vector<double> posterior(double x) const;

  /// Component with the largest posterior at x.
  int assign(double x) const;

  double log_density(double x) const;
};

struct GmmFit {
  GmmModel model;
  std::vector<double> log_likelihood; // one entry per EM iteration
  int restarts = 0;
};

/// EM until the relative log-likelihood change drops below tol or max_iter.
/// Collapsed components (std < 1e-8 of the data range) trigger a reseeded
/// restart, up to 5; persistent collapse is an error.
GmmFit fit_gmm_1d(std::span<const double> values, int components, double tol = 1e-6,
                  int max_iter = 200, std::uint64_t seed = 0);

} // namespace synthvox
