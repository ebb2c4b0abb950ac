#include <doctest.h>

#include "synthvox/geometry.hpp"
#include "synthvox/errors.hpp"
#include "synthvox/rng.hpp"

using namespace synthvox;

TEST_SUITE("geometry") {

TEST_CASE("zero rigid transform is the identity about any center") {
  RigidTransform t;
  CHECK(t.is_identity());
  const Eigen::Matrix4d m = t.matrix_about({12.0, -3.0, 7.5});
  CHECK((m - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("euler angles round-trip through the rotation matrix") {
  RngEngine eng(42);
  for (int trial = 0; trial < 50; ++trial) {
    RigidTransform t;
    for (int a = 0; a < 3; ++a) t.rotation_deg[a] = uniform(eng, -75.0, 75.0);
    const Eigen::Matrix3d rot = t.rotation_matrix();
    RigidTransform back;
    back.rotation_deg = RigidTransform::euler_xyz_deg(rot);
    CHECK((back.rotation_matrix() - rot).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("compose matches matrix product; zero composes to identity") {
  RngEngine eng(7);
  const Eigen::Vector3d center{10.0, 20.0, 30.0};
  for (int trial = 0; trial < 20; ++trial) {
    RigidTransform a, b;
    for (int i = 0; i < 3; ++i) {
      a.rotation_deg[i] = uniform(eng, -40.0, 40.0);
      b.rotation_deg[i] = uniform(eng, -40.0, 40.0);
      a.translation_mm[i] = uniform(eng, -15.0, 15.0);
      b.translation_mm[i] = uniform(eng, -15.0, 15.0);
    }
    const RigidTransform c = RigidTransform::compose(a, b);
    const Eigen::Matrix4d want = a.matrix_about(center) * b.matrix_about(center);
    CHECK((c.matrix_about(center) - want).cwiseAbs().maxCoeff() < 1e-9);
  }
  const RigidTransform z = RigidTransform::compose(RigidTransform{}, RigidTransform{});
  CHECK(z.is_identity(1e-15));
}

TEST_CASE("inverse composes to identity") {
  RngEngine eng(11);
  const Eigen::Vector3d center{1.0, 2.0, 3.0};
  for (int trial = 0; trial < 20; ++trial) {
    RigidTransform t;
    for (int i = 0; i < 3; ++i) {
      t.rotation_deg[i] = uniform(eng, -60.0, 60.0);
      t.translation_mm[i] = uniform(eng, -20.0, 20.0);
    }
    const Eigen::Matrix4d prod = t.matrix_about(center) * t.inverse().matrix_about(center);
    CHECK((prod - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("geometry validation rejects degenerate affines and bad spacing") {
  Geometry g = Geometry::axis_aligned({4, 4, 4}, {0.5, 0.5, 2.0});
  CHECK_NOTHROW(g.validate());

  Geometry singular = g;
  singular.affine.col(0).setZero();
  CHECK_THROWS_AS(singular.validate(), GeometryError);

  Geometry mismatched = g;
  mismatched.spacing[1] = 0.75; // affine column still 0.5
  CHECK_THROWS_AS(mismatched.validate(), GeometryError);
}

TEST_CASE("world center of an axis-aligned grid") {
  const Geometry g = Geometry::axis_aligned({5, 5, 5}, {2.0, 2.0, 2.0}, {10.0, 0.0, 0.0});
  const Eigen::Vector3d c = g.world_center();
  CHECK(c[0] == doctest::Approx(14.0));
  CHECK(c[1] == doctest::Approx(4.0));
  CHECK(c[2] == doctest::Approx(4.0));
}

} // TEST_SUITE
