#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "synthvox/synth.hpp"

using namespace synthvox;
using namespace testsupport;

namespace {

std::pair<double, double> mean_std(const std::vector<float>& xs) {
  double sum = 0.0;
  for (const float x : xs) sum += x;
  const double mean = sum / xs.size();
  double var = 0.0;
  for (const float x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / xs.size())};
}

} // namespace

TEST_SUITE("synth") {

TEST_CASE("single-label volume matches the drawn gaussian") {
  LabelVolume lab(Geometry::axis_aligned({64, 64, 64}));
  lab.data.assign(lab.data.size(), 1);
  lab.dictionary.set(1, LabelInfo{"tissue", 1, 1});

  const SynthesisResult res = labels_to_image(lab, ContrastPrior{}, 12345);
  REQUIRE(res.drawn.count(1) == 1);
  const GaussianParams p = res.drawn.at(1);
  const auto [mean, stddev] = mean_std(res.image.data);

  const double n = static_cast<double>(lab.data.size());
  CHECK(std::abs(mean - p.mean) < 3.0 * p.stddev / std::sqrt(n));
  CHECK(std::abs(stddev - p.stddev) < 5.0 * p.stddev / std::sqrt(2.0 * n));
}

TEST_CASE("per-label statistics hold for every label (5-sigma z-test)") {
  LabelVolume lab(Geometry::axis_aligned({48, 48, 48}));
  // Three slabs of ~36k voxels each.
  for (int k = 0; k < 48; ++k) {
    for (int j = 0; j < 48; ++j) {
      for (int i = 0; i < 48; ++i) lab.at(i, j, k) = k / 16;
    }
  }
  lab.ensure_dictionary();

  const SynthesisResult res = labels_to_image(lab, ContrastPrior{}, 777);
  for (int label = 0; label < 3; ++label) {
    std::vector<float> values;
    for (std::size_t i = 0; i < lab.data.size(); ++i) {
      if (lab.data[i] == label) values.push_back(res.image.data[i]);
    }
    const GaussianParams p = res.drawn.at(label);
    const auto [mean, stddev] = mean_std(values);
    const double n = static_cast<double>(values.size());
    CHECK(std::abs(mean - p.mean) < 5.0 * p.stddev / std::sqrt(n));
    CHECK(std::abs(stddev - p.stddev) < 5.0 * p.stddev / std::sqrt(2.0 * n));
  }
}

TEST_CASE("same seed reproduces the image exactly") {
  LabelVolume lab(Geometry::axis_aligned({16, 16, 16}));
  for (std::size_t i = 0; i < lab.data.size(); ++i) lab.data[i] = i % 2;
  lab.ensure_dictionary();

  const SynthesisResult a = labels_to_image(lab, ContrastPrior{}, 9);
  const SynthesisResult b = labels_to_image(lab, ContrastPrior{}, 9);
  CHECK(a.image.data == b.image.data);
  CHECK(a.drawn.at(0).mean == b.drawn.at(0).mean);
}

TEST_CASE("collapsed std range gives a piecewise-constant image") {
  LabelVolume lab(Geometry::axis_aligned({12, 12, 12}));
  for (std::size_t i = 0; i < lab.data.size(); ++i) lab.data[i] = i % 3;
  lab.ensure_dictionary();

  ContrastPrior prior;
  prior.std_range = {1e-9, 1e-9};
  const SynthesisResult res = labels_to_image(lab, prior, 4);
  for (std::size_t i = 0; i < lab.data.size(); ++i) {
    CHECK(std::abs(res.image.data[i] - res.drawn.at(lab.data[i] % 3).mean) < 1e-6);
  }
}

TEST_CASE("generation groups share one distribution draw") {
  LabelVolume lab(Geometry::axis_aligned({8, 8, 8}));
  for (std::size_t i = 0; i < lab.data.size(); ++i) lab.data[i] = i % 2 ? 5 : 6;
  // Two ids, one generation group.
  lab.dictionary.set(5, LabelInfo{"a", 5, 5});
  lab.dictionary.set(6, LabelInfo{"b", 5, 6});

  const SynthesisResult res = labels_to_image(lab, ContrastPrior{}, 21);
  CHECK(res.drawn.size() == 1);
  CHECK(res.drawn.count(5) == 1);
}

TEST_CASE("bias field magnitude zero is exactly one") {
  const Geometry g = Geometry::axis_aligned({6, 6, 6});
  const BiasField b = sample_bias_field(g, BiasFieldSpec{3, 0.0}, 1);
  for (const float v : b.field.data) CHECK(v == 1.0f);
}

TEST_CASE("order-zero bias field is the constant exp(c)") {
  const Geometry g = Geometry::axis_aligned({5, 5, 5});
  const BiasField b = sample_bias_field(g, BiasFieldSpec{0, 0.5}, 7);
  REQUIRE(b.coefficients.size() == 1);
  const float want = static_cast<float>(std::exp(b.coefficients[0]));
  for (const float v : b.field.data) CHECK(v == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("order-3 field at the corner equals the polynomial at (-1,-1,-1)") {
  const Geometry g = Geometry::axis_aligned({7, 7, 7});
  const BiasFieldSpec spec{3, 0.5};
  const BiasField b = sample_bias_field(g, spec, 99);

  // Independent evaluation with the documented monomial order: nested
  // i -> j -> k loops, i + j + k <= order.
  double poly = 0.0;
  std::size_t m = 0;
  for (int i = 0; i <= spec.order; ++i) {
    for (int j = 0; j <= spec.order - i; ++j) {
      for (int k = 0; k <= spec.order - i - j; ++k) {
        const double term = std::pow(-1.0, i) * std::pow(-1.0, j) * std::pow(-1.0, k);
        poly += b.coefficients.at(m++) * term;
      }
    }
  }
  CHECK(m == b.coefficients.size());
  CHECK(b.field.at(0, 0, 0) == doctest::Approx(std::exp(poly)).epsilon(1e-6));
}

TEST_CASE("bias field stays positive and log-bounded") {
  const Geometry g = Geometry::axis_aligned({9, 8, 7});
  for (const std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    const BiasFieldSpec spec{3, 0.5};
    const BiasField b = sample_bias_field(g, spec, seed);
    const double bound = spec.magnitude * static_cast<double>(b.coefficients.size());
    for (const float v : b.field.data) {
      CHECK(v > 0.0f);
      CHECK(std::abs(std::log(v)) <= bound + 1e-6);
    }
  }
}

TEST_CASE("zero-width noise range is a no-op") {
  const ScalarVolume img = smooth_blobs({8, 8, 8}, 2, 2);
  NoiseSpec spec;
  spec.std_range = {0.0, 0.0};
  const NoiseResult res = add_noise(img, spec, 3);
  CHECK(res.image.data == img.data);
  CHECK(res.sigma == 0.0);
}

TEST_CASE("noise std lands within 2 percent on a 64-cube") {
  ScalarVolume zero(Geometry::axis_aligned({64, 64, 64}));
  const NoiseResult res = add_noise(zero, NoiseSpec{}, 11);
  const auto [mean, stddev] = mean_std(res.image.data);
  CHECK(std::abs(stddev - res.sigma) < 0.02 * res.sigma);
  CHECK(std::abs(mean) < 5.0 * res.sigma / std::sqrt(static_cast<double>(zero.data.size())));
}

TEST_CASE("different seeds give different noise") {
  const ScalarVolume img = smooth_blobs({6, 6, 6}, 1, 8);
  const NoiseResult a = add_noise(img, NoiseSpec{}, 1);
  const NoiseResult b = add_noise(img, NoiseSpec{}, 2);
  CHECK(a.image.data != b.image.data);
}

TEST_CASE("minmax_normalize maps [-2, 6] to (x+2)/8") {
  ScalarVolume img(Geometry::axis_aligned({4, 4, 4}));
  RngEngine eng(6);
  for (auto& v : img.data) v = static_cast<float>(uniform(eng, -2.0, 6.0));
  img.data[0] = -2.0f;
  img.data[1] = 6.0f;

  const ScalarVolume out = minmax_normalize(img);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(out.data[i] == doctest::Approx((img.data[i] + 2.0f) / 8.0f).epsilon(1e-6));
  }
}

TEST_CASE("minmax_normalize is idempotent") {
  const ScalarVolume img = smooth_blobs({8, 8, 8}, 3, 14);
  const ScalarVolume once = minmax_normalize(img);
  const ScalarVolume twice = minmax_normalize(once);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    CHECK(std::abs(twice.data[i] - once.data[i]) < 1e-7f);
  }
}

TEST_CASE("constant input cannot be normalized") {
  ScalarVolume img(Geometry::axis_aligned({3, 3, 3}), 4.2f);
  CHECK_THROWS_AS(minmax_normalize(img), Error);
}

} // TEST_SUITE
