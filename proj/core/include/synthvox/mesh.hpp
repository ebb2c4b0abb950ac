#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace synthvox {

/// Triangulated surface in world mm. Expected closed and consistently
/// oriented; validate_closed() enforces it.
struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;

  /// Every directed edge must be matched by its reverse exactly once.
  /// Throws FormatError naming an unmatched edge otherwise.
  void validate_closed() const;
};

/// Dispatch by extension: .off (ASCII OFF) or .gii (GIfTI surface).
TriangleMesh read_mesh(const std::filesystem::path& path);

TriangleMesh read_off(const std::filesystem::path& path);
void write_off(const TriangleMesh& mesh, const std::filesystem::path& path);

/// GIfTI surface: POINTSET (float32) + TRIANGLE (int32) data arrays with
/// ASCII, Base64Binary or GZipBase64Binary encoding, little-endian.
TriangleMesh read_gifti(const std::filesystem::path& path);

namespace detail {
std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);
std::vector<unsigned char> zlib_compress(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> zlib_decompress(const std::vector<unsigned char>& bytes);
} // namespace detail

} // namespace synthvox
