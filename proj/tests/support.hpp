// Shared fixtures for the test suites: phantoms, meshes, temp dirs and the
// independent oracles the tests check against.
#pragma once

#include <filesystem>
#include <string>

#include "synthvox/mesh.hpp"
#include "synthvox/rng.hpp"
#include "synthvox/volume.hpp"

namespace testsupport {

using namespace synthvox;

/// Fresh directory under ./test-tmp, wiped if it already exists.
inline std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::current_path() / "test-tmp" / tag;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// The 9-tissue dictionary used by the neonatal label maps: ids 0..8.
inline LabelDictionary dhcp_dictionary() {
  LabelDictionary d;
  const char* names[9] = {"Background", "CSF",    "GM",    "WM",   "Ventricles",
                          "Cereb",      "deepGM", "Bstem", "HipAmy"};
  for (int id = 0; id < 9; ++id) d.set(id, LabelInfo{names[id], id, id});
  return d;
}

namespace phantom_detail {

inline bool in_ellipsoid(double i, double j, double k, const Eigen::Vector3d& c,
                         const Eigen::Vector3d& r) {
  const double x = (i - c[0]) / r[0];
  const double y = (j - c[1]) / r[1];
  const double z = (k - c[2]) / r[2];
  return x * x + y * y + z * z <= 1.0;
}

} // namespace phantom_detail

/// Nested-ellipsoid "baby" phantom with all 9 tissues present, isotropic
/// 1 mm grid.
inline LabelVolume baby_phantom(int n = 96) {
  using phantom_detail::in_ellipsoid;
  LabelVolume vol(Geometry::axis_aligned({n, n, n}));
  vol.dictionary = dhcp_dictionary();

  const double c = (n - 1) / 2.0;
  const Eigen::Vector3d center{c, c, c};
  const double s = n;

  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        int label = 0; // Background
        // Most specific first.
        if (in_ellipsoid(i, j, k, center + Eigen::Vector3d{0.06 * s, 0, 0},
                         {0.035 * s, 0.05 * s, 0.035 * s}) ||
            in_ellipsoid(i, j, k, center - Eigen::Vector3d{0.06 * s, 0, 0},
                         {0.035 * s, 0.05 * s, 0.035 * s})) {
          label = 4; // Ventricles
        } else if (in_ellipsoid(i, j, k, center + Eigen::Vector3d{0, 0.10 * s, 0},
                                {0.07 * s, 0.055 * s, 0.07 * s})) {
          label = 6; // deepGM
        } else if (in_ellipsoid(i, j, k, center + Eigen::Vector3d{0, -0.05 * s, -0.20 * s},
                                {0.04 * s, 0.04 * s, 0.09 * s})) {
          label = 7; // Bstem
        } else if (in_ellipsoid(i, j, k, center + Eigen::Vector3d{0.16 * s, -0.02 * s, -0.05 * s},
                                {0.035 * s, 0.05 * s, 0.035 * s}) ||
                   in_ellipsoid(i, j, k, center + Eigen::Vector3d{-0.16 * s, -0.02 * s, -0.05 * s},
                                {0.035 * s, 0.05 * s, 0.035 * s})) {
          label = 8; // HipAmy
        } else if (in_ellipsoid(i, j, k, center + Eigen::Vector3d{0, -0.22 * s, -0.20 * s},
                                {0.10 * s, 0.08 * s, 0.07 * s})) {
          label = 5; // Cereb
        } else if (in_ellipsoid(i, j, k, center, {0.30 * s, 0.28 * s, 0.27 * s})) {
          label = 3; // WM
        } else if (in_ellipsoid(i, j, k, center, {0.36 * s, 0.34 * s, 0.33 * s})) {
          label = 2; // GM
        } else if (in_ellipsoid(i, j, k, center, {0.42 * s, 0.40 * s, 0.40 * s})) {
          label = 1; // CSF
        }
        vol.at(i, j, k) = label;
      }
    }
  }
  return vol;
}

/// T2-like intensities for the phantom with a planted bimodal WM: left WM
/// half near `lo`, right half near `hi`.
inline ScalarVolume bimodal_wm_intensities(const LabelVolume& labels, double lo = 0.2,
                                           double hi = 0.8, double noise_std = 0.02,
                                           std::uint64_t seed = 99) {
  ScalarVolume img(labels.geom);
  RngEngine eng(seed);
  NormalSampler gauss;
  const int cx = labels.geom.dims[0] / 2;
  std::size_t idx = 0;
  for (int k = 0; k < labels.geom.dims[2]; ++k) {
    for (int j = 0; j < labels.geom.dims[1]; ++j) {
      for (int i = 0; i < labels.geom.dims[0]; ++i, ++idx) {
        double mean = 0.5, std = 0.05;
        if (labels.data[idx] == 3) { // WM
          mean = i < cx ? lo : hi;
          std = noise_std;
        }
        img.data[idx] = static_cast<float>(mean + std * gauss(eng));
      }
    }
  }
  return img;
}

/// Sum of random Gaussian blobs, optionally hard-zeroed within `zero_margin`
/// voxels of the border (so circular and zero-fill shifts agree).
inline ScalarVolume smooth_blobs(std::array<int, 3> dims, int n_blobs, std::uint64_t seed,
                                 int zero_margin = 0) {
  ScalarVolume vol(Geometry::axis_aligned(dims));
  RngEngine eng(seed);
  struct Blob {
    double cx, cy, cz, sigma, amp;
  };
  std::vector<Blob> blobs;
  for (int b = 0; b < n_blobs; ++b) {
    Blob blob;
    blob.cx = uniform(eng, dims[0] * 0.3, dims[0] * 0.7);
    blob.cy = uniform(eng, dims[1] * 0.3, dims[1] * 0.7);
    blob.cz = uniform(eng, dims[2] * 0.3, dims[2] * 0.7);
    blob.sigma = uniform(eng, dims[0] * 0.04, dims[0] * 0.09);
    blob.amp = uniform(eng, 0.4, 1.0);
    blobs.push_back(blob);
  }
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        double v = 0.0;
        for (const Blob& b : blobs) {
          const double d2 = (i - b.cx) * (i - b.cx) + (j - b.cy) * (j - b.cy) +
                            (k - b.cz) * (k - b.cz);
          v += b.amp * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
        }
        vol.at(i, j, k) = static_cast<float>(v);
      }
    }
  }
  if (zero_margin > 0) {
    for (int k = 0; k < dims[2]; ++k) {
      for (int j = 0; j < dims[1]; ++j) {
        for (int i = 0; i < dims[0]; ++i) {
          const bool margin = i < zero_margin || j < zero_margin || k < zero_margin ||
                              i >= dims[0] - zero_margin || j >= dims[1] - zero_margin ||
                              k >= dims[2] - zero_margin;
          if (margin) vol.at(i, j, k) = 0.0f;
        }
      }
    }
  }
  return vol;
}

inline double mesh_signed_volume(const TriangleMesh& m) {
  double v = 0.0;
  for (const auto& f : m.faces) {
    v += m.vertices[f[0]].cross(m.vertices[f[1]]).dot(m.vertices[f[2]]);
  }
  return v / 6.0;
}

inline void orient_outward(TriangleMesh& m) {
  if (mesh_signed_volume(m) < 0) {
    for (auto& f : m.faces) std::swap(f[1], f[2]);
  }
}

/// Closed UV sphere (world mm).
inline TriangleMesh uv_sphere(double radius, const Eigen::Vector3d& center, int n_theta = 96,
                              int n_phi = 192) {
  TriangleMesh m;
  m.vertices.push_back(center + Eigen::Vector3d{0, 0, radius}); // north
  for (int i = 1; i < n_theta; ++i) {
    const double theta = M_PI * i / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * j / n_phi;
      m.vertices.push_back(center + radius * Eigen::Vector3d{std::sin(theta) * std::cos(phi),
                                                             std::sin(theta) * std::sin(phi),
                                                             std::cos(theta)});
    }
  }
  m.vertices.push_back(center + Eigen::Vector3d{0, 0, -radius}); // south
  const int south = static_cast<int>(m.vertices.size()) - 1;
  const auto ring = [&](int i, int j) { return 1 + (i - 1) * n_phi + (j % n_phi); };

  for (int j = 0; j < n_phi; ++j) m.faces.push_back({0, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const int a = ring(i, j), b = ring(i + 1, j), c = ring(i + 1, j + 1), d = ring(i, j + 1);
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  }
  for (int j = 0; j < n_phi; ++j) {
    m.faces.push_back({south, ring(n_theta - 1, j + 1), ring(n_theta - 1, j)});
  }
  orient_outward(m);
  return m;
}

/// Axis-aligned box [lo, hi] as 12 triangles.
inline TriangleMesh axis_cube(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  TriangleMesh m;
  for (int corner = 0; corner < 8; ++corner) {
    m.vertices.emplace_back(corner & 1 ? hi[0] : lo[0], corner & 2 ? hi[1] : lo[1],
                            corner & 4 ? hi[2] : lo[2]);
  }
  const int quads[6][4] = {
      {0, 2, 3, 1}, {4, 5, 7, 6}, // z faces
      {0, 1, 5, 4}, {2, 6, 7, 3}, // y faces
      {0, 4, 6, 2}, {1, 3, 7, 5}, // x faces
  };
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  orient_outward(m);
  return m;
}

} // namespace testsupport
