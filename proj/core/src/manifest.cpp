#include "synthvox/manifest.hpp"

#include <fstream>
#include <sstream>

#include "config_json.hpp"

namespace synthvox {

namespace {

using nlohmann::json;

json trajectory_to_json(const MotionTrajectory& t) {
  json segs = json::array();
  for (const MotionSegment& s : t.segments) {
    segs.push_back({{"fraction", s.fraction},
                    {"translation_mm",
                     {s.pose.translation_mm[0], s.pose.translation_mm[1], s.pose.translation_mm[2]}},
                    {"rotation_deg",
                     {s.pose.rotation_deg[0], s.pose.rotation_deg[1], s.pose.rotation_deg[2]}}});
  }
  return json{{"phase_axis", t.phase_axis},
              {"drawn_translation_max_mm", t.drawn_translation_max_mm},
              {"drawn_rotation_max_deg", t.drawn_rotation_max_deg},
              {"segments", segs}};
}

MotionTrajectory trajectory_from_json(const json& j) {
  MotionTrajectory t;
  t.phase_axis = j.at("phase_axis").get<int>();
  t.drawn_translation_max_mm = j.at("drawn_translation_max_mm").get<double>();
  t.drawn_rotation_max_deg = j.at("drawn_rotation_max_deg").get<double>();
  for (const json& js : j.at("segments")) {
    MotionSegment s;
    s.fraction = js.at("fraction").get<double>();
    const auto tr = js.at("translation_mm");
    const auto ro = js.at("rotation_deg");
    s.pose.translation_mm = {tr[0].get<double>(), tr[1].get<double>(), tr[2].get<double>()};
    s.pose.rotation_deg = {ro[0].get<double>(), ro[1].get<double>(), ro[2].get<double>()};
    t.segments.push_back(s);
  }
  return t;
}

json record_to_json(const SampleRecord& r) {
  json j{{"type", "sample"},
         {"sample_id", r.sample_id},
         {"source_subject", r.source_subject},
         {"recipe", to_string(r.recipe)},
         {"sample_seed", r.sample_seed},
         {"sample_index", r.sample_index},
         {"motion_fired", r.motion_fired},
         {"inh_fired", r.inh_fired},
         {"image_path", r.image_path},
         {"labels_path", r.labels_path}};
  if (r.n_chosen) j["n_chosen"] = *r.n_chosen;
  if (!r.contrast.empty()) {
    json c = json::object();
    for (const auto& [id, p] : r.contrast) {
      c[std::to_string(id)] = {{"mean", p.mean}, {"std", p.stddev}};
    }
    j["contrast"] = c;
  }
  if (r.affine) {
    j["affine"] = {{"scale", r.affine->scale},
                   {"rotation_deg", r.affine->rotation_deg},
                   {"translation_mm", r.affine->translation_mm}};
  }
  if (!r.elastic_control_hash.empty()) j["elastic_control_hash"] = r.elastic_control_hash;
  if (!r.bias_coefficients.empty()) j["bias_coefficients"] = r.bias_coefficients;
  if (r.noise_sigma) j["noise_sigma"] = *r.noise_sigma;
  if (r.gamma) j["gamma"] = *r.gamma;
  if (r.trajectory) j["trajectory"] = trajectory_to_json(*r.trajectory);
  if (r.error) j["error"] = *r.error;
  return j;
}

SampleRecord record_from_json(const json& j) {
  SampleRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.source_subject = j.at("source_subject").get<std::string>();
  r.recipe = recipe_from_string(j.at("recipe").get<std::string>());
  r.sample_seed = j.at("sample_seed").get<std::uint64_t>();
  r.sample_index = j.at("sample_index").get<int>();
  r.motion_fired = j.value("motion_fired", false);
  r.inh_fired = j.value("inh_fired", false);
  r.image_path = j.value("image_path", "");
  r.labels_path = j.value("labels_path", "");
  if (j.contains("n_chosen")) r.n_chosen = j["n_chosen"].get<int>();
  if (j.contains("contrast")) {
    for (const auto& [key, val] : j["contrast"].items()) {
      GaussianParams p;
      p.mean = val.at("mean").get<double>();
      p.stddev = val.at("std").get<double>();
      r.contrast[std::stoi(key)] = p;
    }
  }
  if (j.contains("affine")) {
    AffineDraw a;
    const auto get3 = [](const json& arr, std::array<double, 3>& out) {
      for (int i = 0; i < 3; ++i) out[i] = arr[i].get<double>();
    };
    get3(j["affine"].at("scale"), a.scale);
    get3(j["affine"].at("rotation_deg"), a.rotation_deg);
    get3(j["affine"].at("translation_mm"), a.translation_mm);
    r.affine = a;
  }
  r.elastic_control_hash = j.value("elastic_control_hash", "");
  if (j.contains("bias_coefficients")) {
    r.bias_coefficients = j["bias_coefficients"].get<std::vector<double>>();
  }
  if (j.contains("noise_sigma")) r.noise_sigma = j["noise_sigma"].get<double>();
  if (j.contains("gamma")) r.gamma = j["gamma"].get<double>();
  if (j.contains("trajectory")) r.trajectory = trajectory_from_json(j["trajectory"]);
  if (j.contains("error")) r.error = j["error"].get<std::string>();
  return r;
}

} // namespace

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  json header{{"type", "header"},
              {"schema_version", manifest.schema_version},
              {"config", detail::config_to_json(manifest.config)}};
  out << header.dump() << "\n";
  for (const SampleRecord& r : manifest.records) {
    out << record_to_json(r).dump() << "\n";
  }
  if (!out) throw IoError("manifest write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  Manifest m;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("manifest " + path.string() + " line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "header") {
      m.schema_version = j.value("schema_version", 1);
      m.config = detail::config_from_json(j.at("config"), {});
      have_header = true;
    } else if (type == "sample") {
      m.records.push_back(record_from_json(j));
    } else {
      throw FormatError("manifest " + path.string() + " line " + std::to_string(line_no) +
                        ": unknown record type \"" + type + "\"");
    }
  }
  if (!have_header) throw FormatError("manifest has no header record: " + path.string());
  return m;
}

} // namespace synthvox
