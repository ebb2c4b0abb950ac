#include <doctest.h>

#include <set>

#include "support.hpp"
#include "synthvox/deform.hpp"

using namespace synthvox;
using namespace testsupport;

TEST_SUITE("deform") {

TEST_CASE("collapsed ranges sample the identity transform") {
  AffineSpec spec;
  spec.scale_range = {1.0, 1.0};
  spec.rotation_range_deg = {0.0, 0.0};
  spec.translation_range_mm = {0.0, 0.0};
  const AffineScaleTransform t = sample_affine(spec, 3);
  CHECK(t.is_identity(0.0));
}

TEST_CASE("sampled affine parameters are reproducible and in range") {
  const AffineSpec spec; // defaults: 0.9..1.1, -20..20, -10..10
  const AffineScaleTransform a = sample_affine(spec, 1234);
  const AffineScaleTransform b = sample_affine(spec, 1234);
  CHECK(a.scale == b.scale);
  CHECK(a.rotation_deg == b.rotation_deg);
  CHECK(a.translation_mm == b.translation_mm);

  double min_scale = 2.0, max_scale = 0.0;
  double min_rot = 1e9, max_rot = -1e9;
  double min_tr = 1e9, max_tr = -1e9;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const AffineScaleTransform t = sample_affine(spec, seed);
    for (int i = 0; i < 3; ++i) {
      min_scale = std::min(min_scale, t.scale[i]);
      max_scale = std::max(max_scale, t.scale[i]);
      min_rot = std::min(min_rot, t.rotation_deg[i]);
      max_rot = std::max(max_rot, t.rotation_deg[i]);
      min_tr = std::min(min_tr, t.translation_mm[i]);
      max_tr = std::max(max_tr, t.translation_mm[i]);
    }
  }
  CHECK(min_scale >= 0.9);
  CHECK(max_scale <= 1.1);
  CHECK(min_rot >= -20.0);
  CHECK(max_rot <= 20.0);
  CHECK(min_tr >= -10.0);
  CHECK(max_tr <= 10.0);
  // Draws actually cover the range.
  CHECK(max_scale - min_scale > 0.19);
  CHECK(max_rot - min_rot > 38.0);
}

TEST_CASE("zero max displacement gives the identity field") {
  const Geometry g = Geometry::axis_aligned({20, 20, 20});
  ElasticSpec spec;
  spec.max_displacement_mm = 0.0;
  const DeformationField f = sample_elastic(g, spec, 5);
  for (double p : {0.0, 3.7, 11.2, 19.0}) {
    CHECK(f.displacement_at_voxel(p, p / 2, p / 3).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("dense field at a knot equals the independent basis expansion") {
  const Geometry g = Geometry::axis_aligned({23, 23, 23});
  ElasticSpec spec;
  spec.control_points = 12;
  spec.max_displacement_mm = 8.0;
  const DeformationField f = sample_elastic(g, spec, 41);

  // Cubic B-spline at a knot weights the neighbors (1/6, 4/6, 1/6); tensor
  // product over the three axes, edges clamped.
  const double w1d[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  const int P = spec.control_points;
  const auto clamp_p = [&](int p) { return std::clamp(p, 0, P - 1); };

  for (const int knot : {0, 1, 5, 10, 11}) {
    Eigen::Vector3d want = Eigen::Vector3d::Zero();
    for (int dc = -1; dc <= 1; ++dc) {
      for (int db = -1; db <= 1; ++db) {
        for (int da = -1; da <= 1; ++da) {
          const double w = w1d[da + 1] * w1d[db + 1] * w1d[dc + 1];
          want += w * f.control(clamp_p(knot + da), clamp_p(knot + db), clamp_p(knot + dc));
        }
      }
    }
    const Eigen::Vector3d got =
        f.displacement_at_voxel(f.knot_voxel(0, knot), f.knot_voxel(1, knot), f.knot_voxel(2, knot));
    CHECK((got - want).norm() < 1e-9);
  }
}

TEST_CASE("dense displacements never exceed the max norm") {
  const Geometry g = Geometry::axis_aligned({17, 15, 13});
  ElasticSpec spec;
  spec.control_points = 6;
  spec.max_displacement_mm = 8.0;
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const DeformationField f = sample_elastic(g, spec, seed);
    f.validate();
    RngEngine eng(seed + 100);
    for (int trial = 0; trial < 2000; ++trial) {
      const double i = uniform(eng, 0.0, g.dims[0] - 1.0);
      const double j = uniform(eng, 0.0, g.dims[1] - 1.0);
      const double k = uniform(eng, 0.0, g.dims[2] - 1.0);
      CHECK(f.displacement_at_voxel(i, j, k).norm() <= spec.max_displacement_mm + 1e-6);
    }
  }
}

TEST_CASE("identity field leaves volumes unchanged") {
  const ScalarVolume vol = smooth_blobs({12, 12, 12}, 2, 7);
  ElasticSpec spec;
  spec.max_displacement_mm = 0.0;
  const DeformationField f = sample_elastic(vol.geom, spec, 1);
  CHECK(warp(vol, f, Interp::trilinear).data == vol.data);
}

TEST_CASE("constant integer-voxel field shifts exactly") {
  LabelVolume lab(Geometry::axis_aligned({10, 10, 10}));
  RngEngine eng(3);
  for (auto& v : lab.data) v = static_cast<std::int32_t>(uniform_int(eng, 0, 4));
  lab.ensure_dictionary();
  const int bg = lab.dictionary.background_id();

  DeformationField f(lab.geom, 4, 5.0);
  for (int c = 0; c < 4; ++c) {
    for (int b = 0; b < 4; ++b) {
      for (int a = 0; a < 4; ++a) f.set_control(a, b, c, {2.0, 0.0, 0.0});
    }
  }

  const LabelVolume out = warp(lab, f, Interp::nearest);
  // Backward warp: out(v) samples in(v + 2ex).
  for (int k = 0; k < 10; ++k) {
    for (int j = 0; j < 10; ++j) {
      for (int i = 0; i < 10; ++i) {
        const int want = i + 2 < 10 ? lab.at(i + 2, j, k) : bg;
        CHECK(out.at(i, j, k) == want);
      }
    }
  }
}

TEST_CASE("warped label maps stay inside the input label set") {
  LabelVolume lab(Geometry::axis_aligned({16, 16, 16}));
  RngEngine eng(15);
  for (auto& v : lab.data) v = static_cast<std::int32_t>(uniform_int(eng, 0, 6));
  lab.ensure_dictionary();
  std::set<int> input_ids;
  for (const auto v : lab.data) input_ids.insert(v);
  input_ids.insert(lab.dictionary.background_id());

  const DeformationField f = sample_elastic(lab.geom, ElasticSpec{}, 8);
  const LabelVolume out = warp(lab, f, Interp::nearest);
  for (const int id : out.ids_present()) CHECK(input_ids.count(id) == 1);

  CHECK_THROWS_AS(warp(lab, f, Interp::trilinear), Error);
}

TEST_CASE("uniform scale changes foreground volume by s^3") {
  // Sphere of radius 20 voxels in a 64-cube.
  LabelVolume lab(Geometry::axis_aligned({64, 64, 64}));
  const double c = 31.5;
  for (int k = 0; k < 64; ++k) {
    for (int j = 0; j < 64; ++j) {
      for (int i = 0; i < 64; ++i) {
        const double d2 = (i - c) * (i - c) + (j - c) * (j - c) + (k - c) * (k - c);
        lab.at(i, j, k) = d2 <= 20.0 * 20.0 ? 1 : 0;
      }
    }
  }
  lab.ensure_dictionary();

  const double before = static_cast<double>(
      std::count(lab.data.begin(), lab.data.end(), 1));

  AffineScaleTransform t;
  t.scale = {1.15, 1.15, 1.15};
  const LabelVolume out = apply_affine(lab, t, Interp::nearest);
  const double after = static_cast<double>(
      std::count(out.data.begin(), out.data.end(), 1));

  const double want = before * 1.15 * 1.15 * 1.15;
  CHECK(std::abs(after - want) / want < 0.05);
}

} // TEST_SUITE
