#include <doctest.h>

#include <set>

#include "support.hpp"
#include "synthvox/resample.hpp"

using namespace synthvox;
using namespace testsupport;

namespace {

LabelVolume random_labels(std::array<int, 3> dims, int n_labels, std::uint64_t seed) {
  LabelVolume vol(Geometry::axis_aligned(dims));
  RngEngine eng(seed);
  for (auto& v : vol.data) v = static_cast<std::int32_t>(uniform_int(eng, 0, n_labels - 1));
  vol.ensure_dictionary();
  return vol;
}

} // namespace

TEST_SUITE("resample") {

TEST_CASE("identity target geometry leaves the volume unchanged") {
  const ScalarVolume vol = smooth_blobs({8, 8, 8}, 2, 3);
  const ScalarVolume out = resample(vol, vol.geom, Interp::nearest);
  CHECK(out.data == vol.data);

  const LabelVolume lab = random_labels({8, 8, 8}, 4, 5);
  CHECK(resample(lab, lab.geom, Interp::nearest).data == lab.data);
}

TEST_CASE("nearest resampling never invents label ids") {
  const LabelVolume lab = random_labels({10, 9, 8}, 5, 17);
  std::set<int> input_ids;
  for (const auto v : lab.data) input_ids.insert(v);
  input_ids.insert(lab.dictionary.background_id());

  RngEngine eng(23);
  for (int trial = 0; trial < 10; ++trial) {
    Geometry target = lab.geom;
    target.affine(0, 3) += uniform(eng, -4.0, 4.0);
    target.affine(1, 3) += uniform(eng, -4.0, 4.0);
    target.affine(2, 3) += uniform(eng, -4.0, 4.0);
    const LabelVolume out = resample(lab, target, Interp::nearest);
    for (const int id : out.ids_present()) CHECK(input_ids.count(id) == 1);
  }
}

TEST_CASE("trilinear is rejected on label volumes") {
  const LabelVolume lab = random_labels({4, 4, 4}, 3, 1);
  CHECK_THROWS_AS(resample(lab, lab.geom, Interp::trilinear), Error);
  CHECK_THROWS_AS(apply_rigid(lab, RigidTransform{.translation_mm = {1, 0, 0}},
                              Interp::trilinear),
                  Error);
}

TEST_CASE("half-voxel shift splits a delta impulse into two equal neighbors") {
  ScalarVolume vol(Geometry::axis_aligned({9, 9, 9}));
  vol.at(4, 4, 4) = 1.0f;

  // Target shifted +0.5 voxel along x: output voxel i samples input at i+0.5.
  Geometry target = vol.geom;
  target.affine(0, 3) += 0.5;
  const ScalarVolume out = resample(vol, target, Interp::trilinear);

  for (int k = 0; k < 9; ++k) {
    for (int j = 0; j < 9; ++j) {
      for (int i = 0; i < 9; ++i) {
        const bool hit = (j == 4 && k == 4 && (i == 3 || i == 4));
        CHECK(out.at(i, j, k) == doctest::Approx(hit ? 0.5f : 0.0f).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("zero rigid transform is a no-op") {
  const ScalarVolume vol = smooth_blobs({8, 8, 8}, 2, 9);
  CHECK(apply_rigid(vol, RigidTransform{}, Interp::trilinear).data == vol.data);
}

TEST_CASE("integer-voxel translation with nearest equals an index shift") {
  const LabelVolume lab = random_labels({10, 10, 10}, 6, 31);
  const int bg = lab.dictionary.background_id();
  RigidTransform t;
  t.translation_mm = {2.0, -3.0, 1.0}; // 1 mm spacing: whole voxels

  const LabelVolume out = apply_rigid(lab, t, Interp::nearest);

  // Forward shift by +v means output voxel p came from p - v.
  for (int k = 0; k < 10; ++k) {
    for (int j = 0; j < 10; ++j) {
      for (int i = 0; i < 10; ++i) {
        const int si = i - 2, sj = j + 3, sk = k - 1;
        const int want = (si >= 0 && si < 10 && sj >= 0 && sj < 10 && sk >= 0 && sk < 10)
                             ? lab.at(si, sj, sk)
                             : bg;
        CHECK(out.at(i, j, k) == want);
      }
    }
  }
}

TEST_CASE("90-degree z rotation permutes the axes") {
  // Odd dims so the grid center is a voxel; isotropic spacing.
  const int n = 9;
  LabelVolume lab(Geometry::axis_aligned({n, n, n}));
  RngEngine eng(77);
  for (auto& v : lab.data) v = static_cast<std::int32_t>(uniform_int(eng, 0, 5));
  lab.ensure_dictionary();

  RigidTransform t;
  t.rotation_deg = {0.0, 0.0, 90.0};
  const LabelVolume out = apply_rigid(lab, t, Interp::nearest);

  // Pulling through the inverse of Rz(90): source voxel of (i, j) is
  // (j, n-1-i).
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        CHECK(out.at(i, j, k) == lab.at(j, n - 1 - i, k));
      }
    }
  }
}

TEST_CASE("rigid transform followed by its inverse restores smooth volumes") {
  const ScalarVolume vol = smooth_blobs({32, 32, 32}, 3, 13, /*zero_margin=*/8);
  const auto [lo, hi] = vol.min_max();
  const double range = hi - lo;

  RngEngine eng(5);
  for (int trial = 0; trial < 3; ++trial) {
    RigidTransform t;
    for (int a = 0; a < 3; ++a) {
      t.rotation_deg[a] = uniform(eng, -6.0, 6.0);
      t.translation_mm[a] = uniform(eng, -3.0, 3.0);
    }
    const ScalarVolume fwd = apply_rigid(vol, t, Interp::trilinear);
    const ScalarVolume back = apply_rigid(fwd, t.inverse(), Interp::trilinear);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < vol.data.size(); ++i) {
      max_diff = std::max<double>(max_diff, std::abs(back.data[i] - vol.data[i]));
    }
    CHECK(max_diff < 0.05 * range);
  }
}

TEST_CASE("composition equals sequential application within interpolation error") {
  const ScalarVolume vol = smooth_blobs({32, 32, 32}, 3, 21, /*zero_margin=*/8);
  const auto [lo, hi] = vol.min_max();

  RigidTransform a{.translation_mm = {1.5, -0.5, 0.0}, .rotation_deg = {0.0, 4.0, -3.0}};
  RigidTransform b{.translation_mm = {-1.0, 2.0, 0.5}, .rotation_deg = {3.0, 0.0, 2.0}};

  const ScalarVolume sequential =
      apply_rigid(apply_rigid(vol, b, Interp::trilinear), a, Interp::trilinear);
  const ScalarVolume composed =
      apply_rigid(vol, RigidTransform::compose(a, b), Interp::trilinear);

  double max_diff = 0.0;
  for (std::size_t i = 0; i < vol.data.size(); ++i) {
    max_diff = std::max<double>(max_diff, std::abs(sequential.data[i] - composed.data[i]));
  }
  CHECK(max_diff < 0.05 * (hi - lo));
}

} // TEST_SUITE
