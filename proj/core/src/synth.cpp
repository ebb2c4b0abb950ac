#include "synthvox/synth.hpp"

#include <cmath>

#include "synthvox/rng.hpp"

namespace synthvox {

void ContrastPrior::validate() const {
  if (mean_range[0] > mean_range[1]) throw ConfigError("contrast: mean_range not ordered");
  if (std_range[0] > std_range[1]) throw ConfigError("contrast: std_range not ordered");
  if (!(std_range[0] > 0.0)) throw ConfigError("contrast: std_range low must be > 0");
}

void BiasFieldSpec::validate() const {
  if (order < 0) throw ConfigError("bias: order must be >= 0");
  if (magnitude < 0.0) throw ConfigError("bias: magnitude must be >= 0");
}

void NoiseSpec::validate() const {
  if (std_range[0] < 0.0 || std_range[0] > std_range[1]) {
    throw ConfigError("noise: std_range must satisfy 0 <= lo <= hi");
  }
}

SynthesisResult labels_to_image(const LabelVolume& labels, const ContrastPrior& prior,
                                std::uint64_t seed) {
  prior.validate();
  labels.validate();
  if (labels.data.empty()) throw Error("labels_to_image: empty label volume");

  // Parameters are drawn per generation-group id in ascending id order so a
  // seed fully determines the mapping regardless of voxel content order.
  std::map<int, int> to_gen;
  for (const auto& [id, e] : labels.dictionary) to_gen[id] = e.generation_group;

  std::map<int, GaussianParams> drawn;
  for (const auto& [id, gen] : to_gen) drawn[gen] = GaussianParams{};

  RngEngine eng(seed);
  for (auto& [gen, params] : drawn) {
    params.mean = uniform(eng, prior.mean_range[0], prior.mean_range[1]);
    params.stddev = uniform(eng, prior.std_range[0], prior.std_range[1]);
  }

  std::vector<const GaussianParams*> lut(labels.dictionary.max_id() + 1, nullptr);
  for (const auto& [id, gen] : to_gen) lut[id] = &drawn.at(gen);

  SynthesisResult res;
  res.image = ScalarVolume(labels.geom);
  NormalSampler gauss;
  for (std::size_t i = 0; i < labels.data.size(); ++i) {
    const GaussianParams& p = *lut[labels.data[i]];
    res.image.data[i] = static_cast<float>(p.mean + p.stddev * gauss(eng));
  }
  res.drawn = std::move(drawn);
  return res;
}

namespace {

// Monomial exponents for i + j + k <= order, nested i -> j -> k order.
std::vector<std::array<int, 3>> monomials(int order) {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order - i; ++j) {
      for (int k = 0; k <= order - i - j; ++k) out.push_back({i, j, k});
    }
  }
  return out;
}

} // namespace

BiasField sample_bias_field(const Geometry& geom, const BiasFieldSpec& spec, std::uint64_t seed) {
  spec.validate();
  geom.validate();

  const auto expo = monomials(spec.order);
  RngEngine eng(seed);
  std::vector<double> coeff(expo.size());
  for (double& c : coeff) c = uniform(eng, -spec.magnitude, spec.magnitude);

  BiasField out;
  out.coefficients = coeff;
  out.field = ScalarVolume(geom);

  const auto axis_coord = [&](int axis, int idx) {
    const int n = geom.dims[axis];
    return n > 1 ? -1.0 + 2.0 * idx / (n - 1) : 0.0;
  };

  // Per-axis power tables keep the inner loop to one multiply per monomial.
  std::vector<std::vector<double>> pow_u(geom.dims[0]), pow_v(geom.dims[1]), pow_w(geom.dims[2]);
  for (int i = 0; i < geom.dims[0]; ++i) {
    pow_u[i].resize(spec.order + 1);
    double p = 1.0;
    for (int d = 0; d <= spec.order; ++d, p *= axis_coord(0, i)) pow_u[i][d] = p;
  }
  for (int j = 0; j < geom.dims[1]; ++j) {
    pow_v[j].resize(spec.order + 1);
    double p = 1.0;
    for (int d = 0; d <= spec.order; ++d, p *= axis_coord(1, j)) pow_v[j][d] = p;
  }
  for (int k = 0; k < geom.dims[2]; ++k) {
    pow_w[k].resize(spec.order + 1);
    double p = 1.0;
    for (int d = 0; d <= spec.order; ++d, p *= axis_coord(2, k)) pow_w[k][d] = p;
  }

  std::size_t idx = 0;
  for (int k = 0; k < geom.dims[2]; ++k) {
    for (int j = 0; j < geom.dims[1]; ++j) {
      for (int i = 0; i < geom.dims[0]; ++i, ++idx) {
        double poly = 0.0;
        for (std::size_t m = 0; m < expo.size(); ++m) {
          poly += coeff[m] * pow_u[i][expo[m][0]] * pow_v[j][expo[m][1]] * pow_w[k][expo[m][2]];
        }
        out.field.data[idx] = static_cast<float>(std::exp(poly));
      }
    }
  }
  return out;
}

ScalarVolume apply_bias(const ScalarVolume& image, const BiasField& bias) {
  if (!image.geom.same_grid(bias.field.geom)) {
    throw GeometryError("apply_bias: image and field grids differ");
  }
  ScalarVolume out = image;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bias.field.data[i];
  return out;
}

NoiseResult add_noise(const ScalarVolume& image, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate();
  RngEngine eng(seed);
  NoiseResult res;
  res.sigma = uniform(eng, spec.std_range[0], spec.std_range[1]);
  res.image = image;
  if (res.sigma == 0.0) return res;
  NormalSampler gauss;
  for (float& v : res.image.data) v += static_cast<float>(res.sigma * gauss(eng));
  return res;
}

ScalarVolume minmax_normalize(const ScalarVolume& image) {
  const auto [lo, hi] = image.min_max();
  if (!(hi > lo)) throw Error("minmax_normalize: constant input has no defined scaling");
  const double scale = 1.0 / (static_cast<double>(hi) - static_cast<double>(lo));
  ScalarVolume out = image;
  for (float& v : out.data) v = static_cast<float>((v - lo) * scale);
  return out;
}

} // namespace synthvox
