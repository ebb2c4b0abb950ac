#include "synthvox/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "config_json.hpp"

namespace synthvox {

std::string to_string(Recipe r) {
  switch (r) {
    case Recipe::Synth: return "Synth";
    case Recipe::SynthMot: return "SynthMot";
    case Recipe::SynthInh: return "SynthInh";
    case Recipe::SynthMotInh: return "SynthMotInh";
    case Recipe::DataT2Aug: return "DataT2-aug";
  }
  throw Error("unknown recipe enum");
}

Recipe recipe_from_string(const std::string& s) {
  if (s == "Synth") return Recipe::Synth;
  if (s == "SynthMot") return Recipe::SynthMot;
  if (s == "SynthInh") return Recipe::SynthInh;
  if (s == "SynthMotInh") return Recipe::SynthMotInh;
  if (s == "DataT2-aug" || s == "DataT2Aug" || s == "DataT2") return Recipe::DataT2Aug;
  throw ConfigError("unknown recipe \"" + s +
                    "\" (want Synth|SynthMot|SynthInh|SynthMotInh|DataT2-aug)");
}

void GenerationConfig::validate() const {
  if (schema_version != 1) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(schema_version));
  }
  if (samples_per_subject < 1) throw ConfigError("config: samples_per_subject must be >= 1");

  contrast.validate();
  affine.validate();
  elastic.validate();
  bias.validate();
  noise.validate();
  motion.spec.validate();

  const auto check_prob = [](double p, const char* what) {
    if (p < 0.0 || p > 1.0) {
      throw ConfigError(std::string("config: ") + what + " probability outside [0, 1]");
    }
  };
  check_prob(motion.probability, "motion");
  check_prob(inhomogeneity.probability, "inhomogeneity");

  // Recipe gates which augmentations may fire.
  if (!motion_allowed() && motion.probability > 0.0) {
    throw ConfigError("config: recipe " + to_string(recipe) +
                      " does not include motion, but motion probability is " +
                      std::to_string(motion.probability));
  }
  if (!inhomogeneity_allowed() && inhomogeneity.probability > 0.0) {
    throw ConfigError("config: recipe " + to_string(recipe) +
                      " does not include WM inhomogeneity, but its probability is " +
                      std::to_string(inhomogeneity.probability));
  }

  if (inhomogeneity.n_set.empty()) throw ConfigError("config: inhomogeneity n_set is empty");
  for (const int n : inhomogeneity.n_set) {
    if (n < 2 || n > 6) throw ConfigError("config: inhomogeneity n_set values must be in [2, 6]");
  }
  if (gamma.log_range[0] > gamma.log_range[1]) {
    throw ConfigError("config: gamma log_range not ordered");
  }

  std::set<std::string> ids;
  for (const SubjectInput& s : subjects) {
    if (s.id.empty()) throw ConfigError("config: subject with empty id");
    if (!ids.insert(s.id).second) throw ConfigError("config: duplicate subject id " + s.id);
    if (s.labels.empty()) throw ConfigError("config: subject " + s.id + " has no labels path");
    if (recipe == Recipe::DataT2Aug && !s.intensities) {
      throw ConfigError("config: DataT2-aug needs an intensities path for subject " + s.id);
    }
  }
}

GenerationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return detail::config_from_json(j, path.parent_path());
}

GenerationConfig config_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return detail::config_from_json(j, {});
}

std::string config_to_json_string(const GenerationConfig& cfg) {
  return detail::config_to_json(cfg).dump();
}

namespace detail {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, val] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("config: unknown key \"" + key + "\" in " + where);
    }
  }
}

std::array<double, 2> range2(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError("config: " + where + " must be a [lo, hi] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

json config_to_json(const GenerationConfig& cfg) {
  json subjects = json::array();
  for (const SubjectInput& s : cfg.subjects) {
    json js{{"id", s.id}, {"labels", s.labels.string()}};
    if (s.dictionary) js["dictionary"] = s.dictionary->string();
    if (s.intensities) js["intensities"] = s.intensities->string();
    if (!s.subdivided.empty()) {
      json sub = json::object();
      for (const auto& [n, p] : s.subdivided) sub[std::to_string(n)] = p.string();
      js["subdivided"] = sub;
    }
    subjects.push_back(js);
  }

  return json{
      {"schema_version", cfg.schema_version},
      {"recipe", to_string(cfg.recipe)},
      {"seed", cfg.seed},
      {"samples_per_subject", cfg.samples_per_subject},
      {"compress_output", cfg.compress_output},
      {"contrast",
       {{"mean_range", cfg.contrast.mean_range}, {"std_range", cfg.contrast.std_range}}},
      {"affine",
       {{"scale_range", cfg.affine.scale_range},
        {"rotation_range_deg", cfg.affine.rotation_range_deg},
        {"translation_range_mm", cfg.affine.translation_range_mm}}},
      {"elastic",
       {{"control_points", cfg.elastic.control_points},
        {"max_displacement_mm", cfg.elastic.max_displacement_mm}}},
      {"bias", {{"order", cfg.bias.order}, {"magnitude", cfg.bias.magnitude}}},
      {"noise", {{"std_range", cfg.noise.std_range}}},
      {"motion",
       {{"probability", cfg.motion.probability},
        {"translation_max_range_mm", cfg.motion.spec.translation_max_range_mm},
        {"rotation_max_range_deg", cfg.motion.spec.rotation_max_range_deg},
        {"n_events_range", cfg.motion.spec.n_events_range},
        {"phase_axis", cfg.motion.spec.phase_axis},
        {"demean", cfg.motion.spec.demean}}},
      {"inhomogeneity",
       {{"probability", cfg.inhomogeneity.probability}, {"n_set", cfg.inhomogeneity.n_set}}},
      {"gamma", {{"log_range", cfg.gamma.log_range}}},
      {"subjects", subjects},
  };
}

GenerationConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(j,
                 {"schema_version", "recipe", "seed", "samples_per_subject", "compress_output",
                  "contrast", "affine", "elastic", "bias", "noise", "motion", "inhomogeneity",
                  "gamma", "subjects"},
                 "top level");

  GenerationConfig cfg;
  if (!j.contains("recipe")) throw ConfigError("config: missing \"recipe\"");
  cfg.recipe = recipe_from_string(j["recipe"].get<std::string>());
  cfg.schema_version = j.value("schema_version", 1);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.samples_per_subject = j.value("samples_per_subject", 1);
  cfg.compress_output = j.value("compress_output", true);

  // Probabilities default per recipe: 0.5 where the recipe enables the
  // augmentation, 0 otherwise.
  cfg.motion.probability = cfg.motion_allowed() ? 0.5 : 0.0;
  cfg.inhomogeneity.probability = cfg.inhomogeneity_allowed() ? 0.5 : 0.0;

  if (j.contains("contrast")) {
    const json& c = j["contrast"];
    reject_unknown(c, {"mean_range", "std_range"}, "contrast");
    if (c.contains("mean_range")) {
      cfg.contrast.mean_range = range2(c["mean_range"], "contrast.mean_range");
    }
    if (c.contains("std_range")) {
      cfg.contrast.std_range = range2(c["std_range"], "contrast.std_range");
    }
  }
  if (j.contains("affine")) {
    const json& a = j["affine"];
    reject_unknown(a, {"scale_range", "rotation_range_deg", "translation_range_mm"}, "affine");
    if (a.contains("scale_range")) {
      cfg.affine.scale_range = range2(a["scale_range"], "affine.scale_range");
    }
    if (a.contains("rotation_range_deg")) {
      cfg.affine.rotation_range_deg = range2(a["rotation_range_deg"], "affine.rotation_range_deg");
    }
    if (a.contains("translation_range_mm")) {
      cfg.affine.translation_range_mm =
          range2(a["translation_range_mm"], "affine.translation_range_mm");
    }
  }
  if (j.contains("elastic")) {
    const json& e = j["elastic"];
    reject_unknown(e, {"control_points", "max_displacement_mm"}, "elastic");
    cfg.elastic.control_points = e.value("control_points", cfg.elastic.control_points);
    cfg.elastic.max_displacement_mm =
        e.value("max_displacement_mm", cfg.elastic.max_displacement_mm);
  }
  if (j.contains("bias")) {
    const json& b = j["bias"];
    reject_unknown(b, {"order", "magnitude"}, "bias");
    cfg.bias.order = b.value("order", cfg.bias.order);
    cfg.bias.magnitude = b.value("magnitude", cfg.bias.magnitude);
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    reject_unknown(n, {"std_range"}, "noise");
    if (n.contains("std_range")) cfg.noise.std_range = range2(n["std_range"], "noise.std_range");
  }
  if (j.contains("motion")) {
    const json& m = j["motion"];
    reject_unknown(m,
                   {"probability", "translation_max_range_mm", "rotation_max_range_deg",
                    "n_events_range", "phase_axis", "demean"},
                   "motion");
    cfg.motion.probability = m.value("probability", cfg.motion.probability);
    if (m.contains("translation_max_range_mm")) {
      cfg.motion.spec.translation_max_range_mm =
          range2(m["translation_max_range_mm"], "motion.translation_max_range_mm");
    }
    if (m.contains("rotation_max_range_deg")) {
      cfg.motion.spec.rotation_max_range_deg =
          range2(m["rotation_max_range_deg"], "motion.rotation_max_range_deg");
    }
    if (m.contains("n_events_range")) {
      const auto r = range2(m["n_events_range"], "motion.n_events_range");
      cfg.motion.spec.n_events_range = {static_cast<int>(r[0]), static_cast<int>(r[1])};
    }
    cfg.motion.spec.phase_axis = m.value("phase_axis", cfg.motion.spec.phase_axis);
    cfg.motion.spec.demean = m.value("demean", cfg.motion.spec.demean);
  }
  if (j.contains("inhomogeneity")) {
    const json& i = j["inhomogeneity"];
    reject_unknown(i, {"probability", "n_set"}, "inhomogeneity");
    cfg.inhomogeneity.probability = i.value("probability", cfg.inhomogeneity.probability);
    if (i.contains("n_set")) {
      cfg.inhomogeneity.n_set = i["n_set"].get<std::vector<int>>();
    }
  }
  if (j.contains("gamma")) {
    const json& g = j["gamma"];
    reject_unknown(g, {"log_range"}, "gamma");
    if (g.contains("log_range")) cfg.gamma.log_range = range2(g["log_range"], "gamma.log_range");
  }

  if (j.contains("subjects")) {
    if (!j["subjects"].is_array()) throw ConfigError("config: subjects must be an array");
    for (const json& js : j["subjects"]) {
      reject_unknown(js, {"id", "labels", "dictionary", "intensities", "subdivided"}, "subject");
      SubjectInput s;
      s.id = js.value("id", "");
      const auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return (fp.is_absolute() || base_dir.empty()) ? fp : base_dir / fp;
      };
      if (js.contains("labels")) s.labels = resolve(js["labels"].get<std::string>());
      if (js.contains("dictionary")) s.dictionary = resolve(js["dictionary"].get<std::string>());
      if (js.contains("intensities")) {
        s.intensities = resolve(js["intensities"].get<std::string>());
      }
      if (js.contains("subdivided")) {
        for (const auto& [key, val] : js["subdivided"].items()) {
          int n;
          try {
            n = std::stoi(key);
          } catch (...) {
            throw ConfigError("config: subdivided key \"" + key + "\" is not an integer");
          }
          s.subdivided[n] = resolve(val.get<std::string>());
        }
      }
      cfg.subjects.push_back(std::move(s));
    }
  }

  cfg.validate();
  return cfg;
}

} // namespace detail

} // namespace synthvox
