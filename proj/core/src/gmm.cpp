#include "synthvox/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "synthvox/errors.hpp"
#include "synthvox/rng.hpp"

namespace synthvox {

void GmmModel::validate() const {
  if (components < 1) throw Error("gmm: need at least one component");
  if (static_cast<int>(weights.size()) != components ||
      static_cast<int>(means.size()) != components ||
      static_cast<int>(stds.size()) != components) {
    throw Error("gmm: parameter vectors must have K entries");
  }
  double wsum = 0.0;
  for (int k = 0; k < components; ++k) {
    if (weights[k] < 0.0) throw Error("gmm: negative weight");
    if (!(stds[k] > 0.0)) throw Error("gmm: non-positive std");
    if (k > 0 && means[k] < means[k - 1]) throw Error("gmm: means must be sorted ascending");
    wsum += weights[k];
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw Error("gmm: weights must sum to 1");
}

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727; // log(sqrt(2*pi))

double log_normal_pdf(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return -0.5 * z * z - std::log(std) - kLogSqrt2Pi;
}

} // namespace

std::vector<double> GmmModel::posterior(double x) const {
  std::vector<double> lp(components);
  double lse = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < components; ++k) {
    lp[k] = std::log(std::max(weights[k], 1e-300)) + log_normal_pdf(x, means[k], stds[k]);
    lse = std::max(lse, lp[k]);
  }
  double total = 0.0;
  for (int k = 0; k < components; ++k) total += std::exp(lp[k] - lse);
  std::vector<double> post(components);
  for (int k = 0; k < components; ++k) post[k] = std::exp(lp[k] - lse) / total;
  return post;
}

int GmmModel::assign(double x) const {
  const auto post = posterior(x);
  return static_cast<int>(std::max_element(post.begin(), post.end()) - post.begin());
}

double GmmModel::log_density(double x) const {
  double lse = -std::numeric_limits<double>::infinity();
  std::vector<double> lp(components);
  for (int k = 0; k < components; ++k) {
    lp[k] = std::log(std::max(weights[k], 1e-300)) + log_normal_pdf(x, means[k], stds[k]);
    lse = std::max(lse, lp[k]);
  }
  double acc = 0.0;
  for (int k = 0; k < components; ++k) acc += std::exp(lp[k] - lse);
  return lse + std::log(acc);
}

namespace {

struct EmOutcome {
  GmmModel model;
  std::vector<double> log_likelihood;
  bool collapsed = false;
};

EmOutcome run_em(const std::vector<double>& xs, int K, double tol, int max_iter,
                 double collapse_floor, RngEngine* jitter) {
  const std::size_t n = xs.size();

  // Init: quantile-spaced means, shared std of data / K, uniform weights.
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  const double mean_all = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var_all = 0.0;
  for (const double x : xs) var_all += (x - mean_all) * (x - mean_all);
  var_all /= n;
  const double std_all = std::sqrt(std::max(var_all, 1e-300));
  const double range = sorted.back() - sorted.front();

  GmmModel m;
  m.components = K;
  m.weights.assign(K, 1.0 / K);
  m.means.resize(K);
  m.stds.assign(K, std::max(std_all / K, collapse_floor * 2));
  for (int k = 0; k < K; ++k) {
    const double q = (k + 0.5) / K;
    m.means[k] = sorted[static_cast<std::size_t>(q * (n - 1))];
    if (jitter) m.means[k] += uniform(*jitter, -0.05, 0.05) * (range > 0 ? range : 1.0);
  }

  EmOutcome out;
  std::vector<double> resp(static_cast<std::size_t>(K));
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iter; ++iter) {
    // E-step; the likelihood is evaluated at the current parameters.
    std::vector<double> nk(K, 0.0), sum_x(K, 0.0), sum_xx(K, 0.0);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = xs[i];
      double lse = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < K; ++k) {
        resp[k] =
            std::log(std::max(m.weights[k], 1e-300)) + log_normal_pdf(x, m.means[k], m.stds[k]);
        lse = std::max(lse, resp[k]);
      }
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        resp[k] = std::exp(resp[k] - lse);
        total += resp[k];
      }
      ll += lse + std::log(total);
      for (int k = 0; k < K; ++k) {
        const double r = resp[k] / total;
        nk[k] += r;
        sum_x[k] += r * x;
        sum_xx[k] += r * x * x;
      }
    }
    out.log_likelihood.push_back(ll);

    // M-step.
    for (int k = 0; k < K; ++k) {
      if (nk[k] < 1e-10) {
        out.collapsed = true;
        out.model = m;
        return out;
      }
      const double mu = sum_x[k] / nk[k];
      const double var = std::max(sum_xx[k] / nk[k] - mu * mu, 0.0);
      m.weights[k] = nk[k] / n;
      m.means[k] = mu;
      m.stds[k] = std::sqrt(var);
      if (m.stds[k] < collapse_floor) {
        out.collapsed = true;
        out.model = m;
        return out;
      }
    }

    if (std::abs(ll - prev_ll) < tol * (std::abs(prev_ll) + 1e-12)) break;
    prev_ll = ll;
  }

  // Canonical order: components sorted by mean.
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return m.means[a] < m.means[b]; });
  GmmModel sorted_model = m;
  for (int k = 0; k < K; ++k) {
    sorted_model.weights[k] = m.weights[order[k]];
    sorted_model.means[k] = m.means[order[k]];
    sorted_model.stds[k] = m.stds[order[k]];
  }
  out.model = std::move(sorted_model);
  return out;
}

} // namespace

GmmFit fit_gmm_1d(std::span<const double> values, int components, double tol, int max_iter,
                  std::uint64_t seed) {
  if (components < 1) throw Error("fit_gmm_1d: components must be >= 1");
  if (static_cast<int>(values.size()) < 10 * components) {
    throw Error("fit_gmm_1d: need at least 10 samples per component");
  }
  std::vector<double> xs(values.begin(), values.end());
  for (const double x : xs) {
    if (!std::isfinite(x)) throw Error("fit_gmm_1d: non-finite sample");
  }

  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double range = *hi - *lo;
  const double collapse_floor = 1e-8 * (range > 0 ? range : 1.0);

  constexpr int kMaxRestarts = 5;
  for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    RngEngine jitter(derive_seed(seed, "gmm-restart", static_cast<std::uint64_t>(attempt)));
    EmOutcome out =
        run_em(xs, components, tol, max_iter, collapse_floor, attempt == 0 ? nullptr : &jitter);
    if (!out.collapsed) {
      GmmFit fit;
      fit.model = std::move(out.model);
      fit.log_likelihood = std::move(out.log_likelihood);
      fit.restarts = attempt;
      fit.model.validate();
      return fit;
    }
  }
  throw Error("fit_gmm_1d: component collapse persisted after 5 restarts");
}

} // namespace synthvox
