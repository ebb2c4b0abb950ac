#include "synthvox/mesh.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <zlib.h>

#include "synthvox/errors.hpp"

namespace synthvox {

void TriangleMesh::validate_closed() const {
  const int nv = static_cast<int>(vertices.size());
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : faces) {
    for (int e = 0; e < 3; ++e) {
      const int a = f[e], b = f[(e + 1) % 3];
      if (a < 0 || b < 0 || a >= nv || b >= nv) {
        throw FormatError("mesh: face references vertex out of range");
      }
      if (a == b) throw FormatError("mesh: degenerate face edge");
      ++directed[{a, b}];
    }
  }
  for (const auto& [edge, count] : directed) {
    if (count != 1) {
      throw FormatError("mesh not closed/oriented: directed edge (" +
                        std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                        ") used " + std::to_string(count) + " times");
    }
    if (!directed.count({edge.second, edge.first})) {
      throw FormatError("mesh not closed: edge (" + std::to_string(edge.first) + ", " +
                        std::to_string(edge.second) + ") has no reverse");
    }
  }
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".off" || ext == ".OFF") return read_off(path);
  if (ext == ".gii") return read_gifti(path);
  throw FormatError("unsupported mesh format: " + path.string() + " (want .off or .gii)");
}

namespace {

// Token stream that skips '#' comments.
class TokenReader {
public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string tok;
    while (in_ >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in_, rest);
        continue;
      }
      return tok;
    }
    throw FormatError("OFF: unexpected end of file");
  }

  long next_int() {
    const std::string t = next();
    try {
      return std::stol(t);
    } catch (...) {
      throw FormatError("OFF: expected integer, got \"" + t + "\"");
    }
  }

  double next_real() {
    const std::string t = next();
    try {
      return std::stod(t);
    } catch (...) {
      throw FormatError("OFF: expected number, got \"" + t + "\"");
    }
  }

private:
  std::istream& in_;
};

} // namespace

TriangleMesh read_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh: " + path.string());
  TokenReader tok(in);
  const std::string magic = tok.next();
  if (magic != "OFF") throw FormatError("OFF: bad magic \"" + magic + "\" in " + path.string());

  const long nv = tok.next_int();
  const long nf = tok.next_int();
  tok.next_int(); // edge count, ignored

  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (long v = 0; v < nv; ++v) {
    const double x = tok.next_real(), y = tok.next_real(), z = tok.next_real();
    mesh.vertices.emplace_back(x, y, z);
  }
  mesh.faces.reserve(nf);
  for (long f = 0; f < nf; ++f) {
    const long arity = tok.next_int();
    if (arity != 3) throw FormatError("OFF: only triangles supported, face has " +
                                      std::to_string(arity) + " vertices");
    const int a = static_cast<int>(tok.next_int());
    const int b = static_cast<int>(tok.next_int());
    const int c = static_cast<int>(tok.next_int());
    mesh.faces.push_back({a, b, c});
  }
  return mesh;
}

void write_off(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write mesh: " + path.string());
  out << "OFF\n" << mesh.vertices.size() << " " << mesh.faces.size() << " 0\n";
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v[0] << " " << v[1] << " " << v[2] << "\n";
  for (const auto& f : mesh.faces) out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

namespace detail {

namespace {
constexpr char kB64Table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 2 < bytes.size()) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64Table[(v >> 18) & 63];
    out += kB64Table[(v >> 12) & 63];
    out += kB64Table[(v >> 6) & 63];
    out += kB64Table[v & 63];
    i += 3;
  }
  if (i + 1 == bytes.size()) {
    const unsigned v = bytes[i] << 16;
    out += kB64Table[(v >> 18) & 63];
    out += kB64Table[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kB64Table[(v >> 18) & 63];
    out += kB64Table[(v >> 12) & 63];
    out += kB64Table[(v >> 6) & 63];
    out += "=";
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  static int lut[256];
  static bool init = false;
  if (!init) {
    std::fill(std::begin(lut), std::end(lut), -1);
    for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(kB64Table[i])] = i;
    init = true;
  }
  std::vector<unsigned char> out;
  unsigned acc = 0;
  int bits = 0;
  for (const char c : text) {
    if (c == '=' || c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
    const int v = lut[static_cast<unsigned char>(c)];
    if (v < 0) throw FormatError("base64: invalid character");
    acc = (acc << 6) | static_cast<unsigned>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

std::vector<unsigned char> zlib_compress(const std::vector<unsigned char>& bytes) {
  uLongf bound = compressBound(static_cast<uLong>(bytes.size()));
  std::vector<unsigned char> out(bound);
  if (compress(out.data(), &bound, bytes.data(), static_cast<uLong>(bytes.size())) != Z_OK) {
    throw Error("zlib compress failed");
  }
  out.resize(bound);
  return out;
}

std::vector<unsigned char> zlib_decompress(const std::vector<unsigned char>& bytes) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) throw Error("zlib inflateInit failed");
  std::vector<unsigned char> out;
  unsigned char buf[1 << 16];
  zs.next_in = const_cast<unsigned char*>(bytes.data());
  zs.avail_in = static_cast<uInt>(bytes.size());
  int rc;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw FormatError("zlib inflate failed (corrupt GIfTI data?)");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

} // namespace detail

namespace {

struct GiftiArray {
  std::map<std::string, std::string> attrs;
  std::string data; // raw text payload of <Data>
};

std::string attr_or(const GiftiArray& a, const std::string& key, const std::string& fallback) {
  const auto it = a.attrs.find(key);
  return it == a.attrs.end() ? fallback : it->second;
}

// Minimal scanner for the regular GIfTI layout: DataArray elements with
// attribute lists and a <Data> child.
std::vector<GiftiArray> scan_gifti(const std::string& xml) {
  std::vector<GiftiArray> arrays;
  std::size_t pos = 0;
  while (true) {
    const std::size_t start = xml.find("<DataArray", pos);
    if (start == std::string::npos) break;
    const std::size_t tag_end = xml.find('>', start);
    if (tag_end == std::string::npos) throw FormatError("GIfTI: unterminated DataArray tag");

    GiftiArray arr;
    // Attributes: name="value" pairs inside the opening tag.
    std::size_t p = start + 10;
    while (p < tag_end) {
      while (p < tag_end && (std::isspace(static_cast<unsigned char>(xml[p])) || xml[p] == '/')) ++p;
      if (p >= tag_end) break;
      const std::size_t eq = xml.find('=', p);
      if (eq == std::string::npos || eq > tag_end) break;
      const std::string name = xml.substr(p, eq - p);
      const std::size_t q1 = xml.find('"', eq);
      const std::size_t q2 = xml.find('"', q1 + 1);
      if (q1 == std::string::npos || q2 == std::string::npos || q2 > tag_end) {
        throw FormatError("GIfTI: malformed attribute in DataArray");
      }
      arr.attrs[name] = xml.substr(q1 + 1, q2 - q1 - 1);
      p = q2 + 1;
    }

    const std::size_t block_end = xml.find("</DataArray>", tag_end);
    if (block_end == std::string::npos) throw FormatError("GIfTI: unterminated DataArray");
    const std::size_t d1 = xml.find("<Data>", tag_end);
    if (d1 != std::string::npos && d1 < block_end) {
      const std::size_t d2 = xml.find("</Data>", d1);
      if (d2 == std::string::npos || d2 > block_end) throw FormatError("GIfTI: unterminated Data");
      arr.data = xml.substr(d1 + 6, d2 - d1 - 6);
    }
    arrays.push_back(std::move(arr));
    pos = block_end + 12;
  }
  return arrays;
}

std::vector<unsigned char> decode_payload(const GiftiArray& arr) {
  const std::string enc = attr_or(arr, "Encoding", "ASCII");
  if (enc == "Base64Binary") return detail::base64_decode(arr.data);
  if (enc == "GZipBase64Binary") return detail::zlib_decompress(detail::base64_decode(arr.data));
  throw FormatError("GIfTI: unsupported encoding " + enc);
}

template <typename T>
std::vector<T> parse_ascii(const std::string& text) {
  std::istringstream in(text);
  std::vector<T> out;
  double v;
  while (in >> v) out.push_back(static_cast<T>(v));
  return out;
}

} // namespace

TriangleMesh read_gifti(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string xml = ss.str();
  if (xml.find("<GIFTI") == std::string::npos) {
    throw FormatError("not a GIfTI file: " + path.string());
  }

  TriangleMesh mesh;
  bool have_points = false, have_faces = false;
  for (const GiftiArray& arr : scan_gifti(xml)) {
    const std::string intent = attr_or(arr, "Intent", "");
    const std::string enc = attr_or(arr, "Encoding", "ASCII");
    const std::string endian = attr_or(arr, "Endian", "LittleEndian");
    if (enc != "ASCII" && endian != "LittleEndian") {
      throw FormatError("GIfTI: big-endian data unsupported");
    }
    if (!attr_or(arr, "ExternalFileName", "").empty()) {
      throw FormatError("GIfTI: external file data unsupported");
    }

    if (intent == "NIFTI_INTENT_POINTSET") {
      const std::string dt = attr_or(arr, "DataType", "NIFTI_TYPE_FLOAT32");
      if (dt != "NIFTI_TYPE_FLOAT32") throw FormatError("GIfTI: pointset must be float32");
      std::vector<float> vals;
      if (enc == "ASCII") {
        vals = parse_ascii<float>(arr.data);
      } else {
        const auto bytes = decode_payload(arr);
        vals.resize(bytes.size() / 4);
        std::memcpy(vals.data(), bytes.data(), vals.size() * 4);
      }
      if (vals.size() % 3 != 0) throw FormatError("GIfTI: pointset size not a multiple of 3");
      mesh.vertices.reserve(vals.size() / 3);
      for (std::size_t i = 0; i + 2 < vals.size(); i += 3) {
        mesh.vertices.emplace_back(vals[i], vals[i + 1], vals[i + 2]);
      }
      have_points = true;
    } else if (intent == "NIFTI_INTENT_TRIANGLE") {
      const std::string dt = attr_or(arr, "DataType", "NIFTI_TYPE_INT32");
      if (dt != "NIFTI_TYPE_INT32") throw FormatError("GIfTI: triangles must be int32");
      std::vector<std::int32_t> vals;
      if (enc == "ASCII") {
        vals = parse_ascii<std::int32_t>(arr.data);
      } else {
        const auto bytes = decode_payload(arr);
        vals.resize(bytes.size() / 4);
        std::memcpy(vals.data(), bytes.data(), vals.size() * 4);
      }
      if (vals.size() % 3 != 0) throw FormatError("GIfTI: triangle size not a multiple of 3");
      mesh.faces.reserve(vals.size() / 3);
      for (std::size_t i = 0; i + 2 < vals.size(); i += 3) {
        mesh.faces.push_back({vals[i], vals[i + 1], vals[i + 2]});
      }
      have_faces = true;
    }
  }

  if (!have_points || !have_faces) {
    throw FormatError("GIfTI: need POINTSET and TRIANGLE arrays: " + path.string());
  }
  return mesh;
}

} // namespace synthvox
