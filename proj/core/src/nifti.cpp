#include "synthvox/nifti.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <zlib.h>

#include <nlohmann/json.hpp>

namespace synthvox {

namespace {

// NIfTI-1 header, 348 bytes, little-endian on disk.
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must pack to 348 bytes");

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;

bool is_gz(const std::filesystem::path& p) {
  return p.extension() == ".gz";
}

std::vector<char> read_all_bytes(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw IoError("no such file: " + path.string());
  }
  std::vector<char> bytes;
  if (is_gz(path)) {
    gzFile gz = gzopen(path.string().c_str(), "rb");
    if (!gz) throw IoError("cannot open " + path.string());
    char buf[1 << 16];
    int n;
    while ((n = gzread(gz, buf, sizeof(buf))) > 0) {
      bytes.insert(bytes.end(), buf, buf + n);
    }
    const bool bad = n < 0;
    gzclose(gz);
    if (bad) throw IoError("gzip read failed on " + path.string());
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    in.seekg(0, std::ios::end);
    bytes.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("read failed on " + path.string());
  }
  return bytes;
}

void write_all_bytes(const std::filesystem::path& path, const std::vector<char>& bytes) {
  if (is_gz(path)) {
    gzFile gz = gzopen(path.string().c_str(), "wb");
    if (!gz) throw IoError("cannot open for write: " + path.string());
    std::size_t off = 0;
    while (off < bytes.size()) {
      const auto chunk = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - off, 1 << 24));
      if (gzwrite(gz, bytes.data() + off, chunk) != static_cast<int>(chunk)) {
        gzclose(gz);
        throw IoError("gzip write failed on " + path.string());
      }
      off += chunk;
    }
    if (gzclose(gz) != Z_OK) throw IoError("gzip close failed on " + path.string());
  } else {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed on " + path.string());
  }
}

Eigen::Matrix4d affine_from_header(const Nifti1Header& h) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  if (h.sform_code > 0) {
    for (int c = 0; c < 4; ++c) {
      m(0, c) = h.srow_x[c];
      m(1, c) = h.srow_y[c];
      m(2, c) = h.srow_z[c];
    }
    return m;
  }
  if (h.qform_code > 0) {
    const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    const double a2 = 1.0 - (b * b + c * c + d * d);
    const double a = a2 > 0 ? std::sqrt(a2) : 0.0;
    Eigen::Matrix3d rot;
    rot << a * a + b * b - c * c - d * d, 2 * b * c - 2 * a * d, 2 * b * d + 2 * a * c,
        2 * b * c + 2 * a * d, a * a + c * c - b * b - d * d, 2 * c * d - 2 * a * b,
        2 * b * d - 2 * a * c, 2 * c * d + 2 * a * b, a * a + d * d - c * c - b * b;
    const double qfac = h.pixdim[0] < 0 ? -1.0 : 1.0;
    const Eigen::Vector3d sp{h.pixdim[1], h.pixdim[2], h.pixdim[3] * qfac};
    m.topLeftCorner<3, 3>() = rot * sp.asDiagonal();
    m(0, 3) = h.qoffset_x;
    m(1, 3) = h.qoffset_y;
    m(2, 3) = h.qoffset_z;
    return m;
  }
  for (int a = 0; a < 3; ++a) m(a, a) = h.pixdim[a + 1] > 0 ? h.pixdim[a + 1] : 1.0;
  return m;
}

Geometry geometry_from_header(const Nifti1Header& h) {
  Geometry g;
  g.dims = {h.dim[1], h.dim[2], h.dim[3]};
  g.affine = affine_from_header(h);
  for (int a = 0; a < 3; ++a) g.spacing[a] = g.affine.block<3, 1>(0, a).norm();
  try {
    g.validate();
  } catch (const GeometryError& e) {
    throw FormatError(std::string("NIfTI header field srow/pixdim invalid: ") + e.what());
  }
  return g;
}

template <typename T>
std::vector<T> cast_payload(const char* p, std::size_t n, std::int16_t dt) {
  std::vector<T> out(n);
  switch (dt) {
    case kDtUint8: {
      const auto* s = reinterpret_cast<const std::uint8_t*>(p);
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(s[i]);
      break;
    }
    case kDtInt16: {
      std::int16_t v;
      for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(&v, p + 2 * i, 2);
        out[i] = static_cast<T>(v);
      }
      break;
    }
    case kDtInt32: {
      std::int32_t v;
      for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(&v, p + 4 * i, 4);
        out[i] = static_cast<T>(v);
      }
      break;
    }
    case kDtFloat32: {
      float v;
      for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(&v, p + 4 * i, 4);
        out[i] = static_cast<T>(v);
      }
      break;
    }
    default:
      throw FormatError("unsupported NIfTI datatype " + std::to_string(dt));
  }
  return out;
}

Nifti1Header blank_header(const Geometry& g, std::int16_t dt, std::int16_t bitpix) {
  Nifti1Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  h.dim[1] = static_cast<std::int16_t>(g.dims[0]);
  h.dim[2] = static_cast<std::int16_t>(g.dims[1]);
  h.dim[3] = static_cast<std::int16_t>(g.dims[2]);
  for (int a = 4; a < 8; ++a) h.dim[a] = 1;
  h.datatype = dt;
  h.bitpix = bitpix;
  h.pixdim[0] = 1.0f;
  for (int a = 0; a < 3; ++a) h.pixdim[a + 1] = static_cast<float>(g.spacing[a]);
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2; // mm
  h.sform_code = 1; // scanner anat
  h.qform_code = 0;
  for (int c = 0; c < 4; ++c) {
    h.srow_x[c] = static_cast<float>(g.affine(0, c));
    h.srow_y[c] = static_cast<float>(g.affine(1, c));
    h.srow_z[c] = static_cast<float>(g.affine(2, c));
  }
  std::memcpy(h.magic, "n+1", 4);
  return h;
}

std::vector<char> serialize(const Nifti1Header& h, const char* payload, std::size_t payload_bytes) {
  std::vector<char> bytes(352 + payload_bytes);
  std::memcpy(bytes.data(), &h, sizeof(h));
  // 4-byte extension flag, all zero: no extensions.
  std::memset(bytes.data() + 348, 0, 4);
  std::memcpy(bytes.data() + 352, payload, payload_bytes);
  return bytes;
}

} // namespace

std::variant<ScalarVolume, LabelVolume> read_nifti(const std::filesystem::path& path) {
  const std::vector<char> bytes = read_all_bytes(path);
  if (bytes.size() < 352) throw FormatError("file too small for a NIfTI-1 header: " + path.string());

  Nifti1Header h;
  std::memcpy(&h, bytes.data(), sizeof(h));
  if (h.sizeof_hdr != 348) {
    throw FormatError("NIfTI header field sizeof_hdr != 348 (big-endian or not NIfTI-1): " +
                      path.string());
  }
  if (std::memcmp(h.magic, "n+1", 3) != 0) {
    if (std::memcmp(h.magic, "ni1", 3) == 0) {
      throw FormatError("NIfTI header field magic: two-file (.hdr/.img) form unsupported");
    }
    throw FormatError("NIfTI header field magic invalid");
  }
  if (h.dim[0] < 3) throw FormatError("NIfTI header field dim[0] < 3 unsupported");
  for (int a = h.dim[0]; a >= 4; --a) {
    if (h.dim[a] > 1) throw FormatError("unsupported 4D NIfTI shape (dim[" + std::to_string(a) +
                                        "]=" + std::to_string(h.dim[a]) + ")");
  }
  for (int a = 1; a <= 3; ++a) {
    if (h.dim[a] <= 0) throw FormatError("NIfTI header field dim[" + std::to_string(a) + "] <= 0");
  }

  const Geometry geom = geometry_from_header(h);
  const std::size_t n = geom.voxel_count();
  const std::size_t vox_offset = static_cast<std::size_t>(h.vox_offset);
  if (vox_offset < 348) throw FormatError("NIfTI header field vox_offset < 348");
  const std::size_t elem = static_cast<std::size_t>(h.bitpix) / 8;
  if (bytes.size() < vox_offset + n * elem) {
    throw FormatError("NIfTI payload truncated: " + path.string());
  }
  const char* payload = bytes.data() + vox_offset;

  const bool scaled = (h.scl_slope != 0.0f && h.scl_slope != 1.0f) || h.scl_inter != 0.0f;

  if (h.datatype == kDtFloat32) {
    ScalarVolume vol;
    vol.geom = geom;
    vol.data = cast_payload<float>(payload, n, h.datatype);
    if (scaled) {
      for (float& v : vol.data) v = v * h.scl_slope + h.scl_inter;
    }
    vol.validate();
    return vol;
  }

  if (h.datatype == kDtUint8 || h.datatype == kDtInt16 || h.datatype == kDtInt32) {
    if (scaled) {
      throw FormatError("NIfTI header field scl_slope/scl_inter: scaling on integer labels");
    }
    LabelVolume vol;
    vol.geom = geom;
    vol.data = cast_payload<std::int32_t>(payload, n, h.datatype);
    vol.ensure_dictionary();
    vol.validate();
    return vol;
  }

  throw FormatError("NIfTI header field datatype " + std::to_string(h.datatype) +
                    " unsupported (want uint8/int16/int32/float32)");
}

ScalarVolume read_scalar_nifti(const std::filesystem::path& path) {
  auto v = read_nifti(path);
  if (auto* s = std::get_if<ScalarVolume>(&v)) return std::move(*s);
  throw FormatError("expected a float32 (scalar) NIfTI volume: " + path.string());
}

LabelVolume read_label_nifti(const std::filesystem::path& path) {
  auto v = read_nifti(path);
  if (auto* l = std::get_if<LabelVolume>(&v)) return std::move(*l);
  throw FormatError("expected an integer (label) NIfTI volume: " + path.string());
}

void write_nifti(const ScalarVolume& vol, const std::filesystem::path& path) {
  vol.geom.validate();
  vol.validate();
  const Nifti1Header h = blank_header(vol.geom, kDtFloat32, 32);
  write_all_bytes(path, serialize(h, reinterpret_cast<const char*>(vol.data.data()),
                                  vol.data.size() * sizeof(float)));
}

void write_nifti(const LabelVolume& vol, const std::filesystem::path& path) {
  vol.geom.validate();
  vol.validate();
  const auto ids = vol.ids_present();
  const int max_id = ids.empty() ? 0 : ids.back();

  if (max_id < 256) {
    std::vector<std::uint8_t> buf(vol.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<std::uint8_t>(vol.data[i]);
    const Nifti1Header h = blank_header(vol.geom, kDtUint8, 8);
    write_all_bytes(path, serialize(h, reinterpret_cast<const char*>(buf.data()), buf.size()));
  } else if (max_id < 32768) {
    std::vector<std::int16_t> buf(vol.data.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<std::int16_t>(vol.data[i]);
    const Nifti1Header h = blank_header(vol.geom, kDtInt16, 16);
    write_all_bytes(path, serialize(h, reinterpret_cast<const char*>(buf.data()), buf.size() * 2));
  } else {
    const Nifti1Header h = blank_header(vol.geom, kDtInt32, 32);
    write_all_bytes(path, serialize(h, reinterpret_cast<const char*>(vol.data.data()),
                                    vol.data.size() * 4));
  }
}

LabelDictionary load_label_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label dictionary: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("label dictionary " + path.string() + ": " + e.what());
  }
  if (!j.contains("labels") || !j["labels"].is_object()) {
    throw FormatError("label dictionary " + path.string() + ": missing \"labels\" object");
  }
  LabelDictionary dict;
  for (const auto& [key, val] : j["labels"].items()) {
    int id;
    try {
      id = std::stoi(key);
    } catch (...) {
      throw FormatError("label dictionary " + path.string() + ": non-integer id \"" + key + "\"");
    }
    LabelInfo e;
    e.name = val.at("name").get<std::string>();
    e.generation_group = val.value("generation_group", id);
    e.target_group = val.value("target_group", id);
    dict.set(id, e);
  }
  return dict;
}

void save_label_dictionary(const LabelDictionary& dict, const std::filesystem::path& path) {
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [id, e] : dict) {
    labels[std::to_string(id)] = {
        {"name", e.name},
        {"generation_group", e.generation_group},
        {"target_group", e.target_group},
    };
  }
  nlohmann::json j{{"schema_version", 1}, {"labels", labels}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write label dictionary: " + path.string());
  out << j.dump(2) << "\n";
}

std::filesystem::path sidecar_path_for(const std::filesystem::path& volume_path) {
  std::filesystem::path p = volume_path;
  if (p.extension() == ".gz") p.replace_extension();
  if (p.extension() == ".nii") p.replace_extension();
  p += ".labels.json";
  return p;
}

} // namespace synthvox
