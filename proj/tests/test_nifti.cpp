#include <doctest.h>

#include <fstream>

#include "support.hpp"
#include "synthvox/nifti.hpp"

using namespace synthvox;
using namespace testsupport;

namespace {

std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return std::vector<char>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

void patch_file(const std::filesystem::path& p, std::size_t offset, const void* data,
                std::size_t n) {
  std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
  REQUIRE(f);
  f.seekp(static_cast<std::streamoff>(offset));
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

} // namespace

TEST_SUITE("nifti") {

TEST_CASE("tiny all-zero volume round-trips bit-identically") {
  const auto dir = temp_dir("nifti-roundtrip");
  ScalarVolume vol(Geometry::axis_aligned({2, 2, 2}));
  write_nifti(vol, dir / "a.nii");
  write_nifti(vol, dir / "b.nii");
  CHECK(file_bytes(dir / "a.nii") == file_bytes(dir / "b.nii"));

  const ScalarVolume back = read_scalar_nifti(dir / "a.nii");
  CHECK(back.geom.dims == vol.geom.dims);
  CHECK(back.data == vol.data);
}

TEST_CASE("random volumes round-trip exactly, plain and gzipped") {
  const auto dir = temp_dir("nifti-random");
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const ScalarVolume vol = smooth_blobs({7, 5, 6}, 3, seed);
    for (const char* name : {"v.nii", "v.nii.gz"}) {
      write_nifti(vol, dir / name);
      const ScalarVolume back = read_scalar_nifti(dir / name);
      CHECK(back.data == vol.data);
      CHECK((back.geom.affine - vol.geom.affine).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("gzip output is deterministic") {
  const auto dir = temp_dir("nifti-gz-det");
  const ScalarVolume vol = smooth_blobs({9, 9, 9}, 2, 5);
  write_nifti(vol, dir / "a.nii.gz");
  write_nifti(vol, dir / "b.nii.gz");
  CHECK(file_bytes(dir / "a.nii.gz") == file_bytes(dir / "b.nii.gz"));
}

TEST_CASE("labels keep an integer datatype") {
  const auto dir = temp_dir("nifti-labels");
  LabelVolume small(Geometry::axis_aligned({3, 3, 3}));
  small.data.assign(27, 0);
  small.at(1, 1, 1) = 200;
  small.ensure_dictionary();
  write_nifti(small, dir / "small.nii");
  // datatype field at offset 70: uint8 = 2
  const auto bytes = file_bytes(dir / "small.nii");
  std::int16_t dt;
  std::memcpy(&dt, bytes.data() + 70, 2);
  CHECK(dt == 2);
  const LabelVolume back = read_label_nifti(dir / "small.nii");
  CHECK(back.data == small.data);
}

TEST_CASE("label ids above 255 fall back to int16") {
  const auto dir = temp_dir("nifti-labels16");
  LabelVolume vol(Geometry::axis_aligned({3, 3, 3}));
  vol.at(0, 0, 0) = 300;
  vol.ensure_dictionary();
  write_nifti(vol, dir / "wide.nii");
  const auto bytes = file_bytes(dir / "wide.nii");
  std::int16_t dt;
  std::memcpy(&dt, bytes.data() + 70, 2);
  CHECK(dt == 4); // int16
  CHECK(read_label_nifti(dir / "wide.nii").data == vol.data);
}

TEST_CASE("rotated affine survives the float32 header within 1e-6") {
  const auto dir = temp_dir("nifti-affine");
  Geometry g;
  g.dims = {4, 4, 4};
  g.spacing = {1.0, 1.0, 1.0};
  // 20 degrees about z, built independently of the library's rigid code.
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(20.0 * M_PI / 180.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  g.affine.setIdentity();
  g.affine.topLeftCorner<3, 3>() = rot;
  g.affine.topRightCorner<3, 1>() = Eigen::Vector3d{5.0, -2.0, 1.5};

  ScalarVolume vol(g, 1.0f);
  write_nifti(vol, dir / "rot.nii");
  const ScalarVolume back = read_scalar_nifti(dir / "rot.nii");
  CHECK((back.geom.affine - g.affine).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("malformed headers are rejected with the offending field") {
  const auto dir = temp_dir("nifti-malformed");
  ScalarVolume vol(Geometry::axis_aligned({2, 2, 2}));
  write_nifti(vol, dir / "v.nii");

  SUBCASE("non-invertible affine") {
    const float zeros[12] = {};
    patch_file(dir / "v.nii", 280, zeros, sizeof(zeros)); // srow_x/y/z
    CHECK_THROWS_WITH_AS(read_nifti(dir / "v.nii"),
                         doctest::Contains("srow"), FormatError);
  }
  SUBCASE("4D shape") {
    const std::int16_t dims[8] = {4, 2, 2, 2, 5, 1, 1, 1};
    patch_file(dir / "v.nii", 40, dims, sizeof(dims));
    CHECK_THROWS_WITH_AS(read_nifti(dir / "v.nii"), doctest::Contains("4D"), FormatError);
  }
  SUBCASE("bad magic") {
    const char magic[4] = {'x', 'y', 'z', 0};
    patch_file(dir / "v.nii", 344, magic, 4);
    CHECK_THROWS_WITH_AS(read_nifti(dir / "v.nii"), doctest::Contains("magic"), FormatError);
  }
  SUBCASE("unsupported datatype") {
    const std::int16_t dt = 64; // float64
    patch_file(dir / "v.nii", 70, &dt, 2);
    CHECK_THROWS_WITH_AS(read_nifti(dir / "v.nii"), doctest::Contains("datatype"), FormatError);
  }
}

TEST_CASE("scl_slope applies to scalars and rejects labels") {
  const auto dir = temp_dir("nifti-scl");
  ScalarVolume vol(Geometry::axis_aligned({2, 2, 2}), 3.0f);
  write_nifti(vol, dir / "v.nii");
  const float slope = 2.0f, inter = 1.0f;
  patch_file(dir / "v.nii", 112, &slope, 4);
  patch_file(dir / "v.nii", 116, &inter, 4);
  const ScalarVolume back = read_scalar_nifti(dir / "v.nii");
  CHECK(back.data[0] == doctest::Approx(7.0f));

  LabelVolume lab(Geometry::axis_aligned({2, 2, 2}));
  lab.ensure_dictionary();
  write_nifti(lab, dir / "l.nii");
  patch_file(dir / "l.nii", 112, &slope, 4);
  CHECK_THROWS_AS(read_nifti(dir / "l.nii"), FormatError);
}

TEST_CASE("nine-label file plus sidecar yields the full dictionary") {
  const auto dir = temp_dir("nifti-dict");
  LabelVolume vol(Geometry::axis_aligned({3, 3, 3}));
  for (int id = 0; id < 9; ++id) vol.data[id] = id;
  vol.ensure_dictionary();
  write_nifti(vol, dir / "labels.nii.gz");
  save_label_dictionary(dhcp_dictionary(), sidecar_path_for(dir / "labels.nii.gz"));

  LabelVolume back = read_label_nifti(dir / "labels.nii.gz");
  back.dictionary = load_label_dictionary(sidecar_path_for(dir / "labels.nii.gz"));
  CHECK(back.dictionary.size() == 9);
  CHECK(back.dictionary.info(2).name == "GM");
  CHECK(back.dictionary.find_by_name("ventricles").has_value());
  CHECK_NOTHROW(back.validate());
}

TEST_CASE("sidecar path derivation") {
  CHECK(sidecar_path_for("sub1.nii.gz") == std::filesystem::path("sub1.labels.json"));
  CHECK(sidecar_path_for("dir/sub1.nii") == std::filesystem::path("dir/sub1.labels.json"));
}

} // TEST_SUITE
