#include "synthvox/evaluate.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "synthvox/label_ops.hpp"
#include "synthvox/nifti.hpp"

namespace synthvox {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::optional<std::filesystem::path> find_volume(const std::filesystem::path& dir,
                                                 const std::string& subject) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    const auto p = dir / (subject + ext);
    if (std::filesystem::exists(p)) return p;
  }
  return std::nullopt;
}

LabelVolume load_labels_with_sidecar(const std::filesystem::path& path) {
  LabelVolume vol = read_label_nifti(path);
  const auto sc = sidecar_path_for(path);
  if (std::filesystem::exists(sc)) {
    vol.dictionary = load_label_dictionary(sc);
    vol.ensure_dictionary();
  }
  return vol;
}

} // namespace

std::vector<SubjectRecord> read_subjects_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open subjects csv: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw FormatError("subjects csv is empty: " + path.string());
  const auto header = split_csv_line(line);
  int col_id = -1, col_age = -1, col_contrast = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "subject_id") col_id = static_cast<int>(c);
    if (header[c] == "age_weeks") col_age = static_cast<int>(c);
    if (header[c] == "contrast") col_contrast = static_cast<int>(c);
  }
  if (col_id < 0) {
    throw FormatError("subjects csv needs a subject_id column: " + path.string());
  }

  std::vector<SubjectRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) <= col_id) {
      throw FormatError("subjects csv line " + std::to_string(line_no) + ": too few fields");
    }
    SubjectRecord rec;
    rec.subject_id = fields[col_id];
    if (col_age >= 0 && col_age < static_cast<int>(fields.size()) && !fields[col_age].empty()) {
      try {
        rec.age_weeks = std::stod(fields[col_age]);
      } catch (...) {
        throw FormatError("subjects csv line " + std::to_string(line_no) + ": bad age_weeks");
      }
    }
    if (col_contrast >= 0 && col_contrast < static_cast<int>(fields.size())) {
      rec.contrast = fields[col_contrast];
    }
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

EvaluateResult evaluate_directories(const EvaluateOptions& opts) {
  EvaluateResult result;
  result.report.subjects = read_subjects_csv(opts.subjects_csv);
  std::filesystem::create_directories(opts.out_dir);

  // pred and gt structure volumes for the cross-set Pearson correlation
  std::map<std::string, std::map<int, double>> gt_volumes;
  bool merged_any = false;

  for (const SubjectRecord& subj : result.report.subjects) {
    const auto pred_path = find_volume(opts.pred_dir, subj.subject_id);
    const auto gt_path = find_volume(opts.gt_dir, subj.subject_id);
    if (!pred_path || !gt_path) {
      result.missing_subjects.push_back(subj.subject_id);
      continue;
    }

    LabelVolume pred = load_labels_with_sidecar(*pred_path);
    LabelVolume gt = load_labels_with_sidecar(*gt_path);

    if (opts.merge_csf_ventricles) {
      const bool can_merge = gt.dictionary.find_by_name("CSF").has_value() &&
                             (gt.dictionary.find_by_name("Ventricles").has_value() ||
                              gt.dictionary.find_by_name("Ventricle").has_value());
      if (can_merge) {
        gt = merge_for_eval(gt);
        try {
          pred = merge_for_eval(pred);
        } catch (const Error&) {
          // pred dictionary may lack the names; ids still comparable
        }
        merged_any = true;
      }
    }

    // Structures: every named id in the GT except background-like ones.
    std::vector<int> structures;
    {
      const auto bg = gt.dictionary.background_ids();
      for (const int id : gt.ids_present()) {
        if (std::find(bg.begin(), bg.end(), id) == bg.end()) structures.push_back(id);
      }
    }

    for (const int sid : structures) {
      MetricRow row;
      row.subject_id = subj.subject_id;
      row.structure_id = sid;
      row.structure = gt.dictionary.contains(sid) ? gt.dictionary.info(sid).name
                                                  : "label_" + std::to_string(sid);
      row.dice = dice(pred, gt, sid);
      try {
        row.asd_mm = average_surface_distance(pred, gt, sid);
      } catch (const Error&) {
        row.asd_mm.reset(); // one side empty
      }
      row.volume_mm3 = structure_volume_mm3(pred, sid);
      gt_volumes[subj.subject_id][sid] = structure_volume_mm3(gt, sid);
      result.report.rows.push_back(std::move(row));
    }
  }

  result.age_bins = bin_by_age(result.report, opts.age_edges);
  if (result.report.per_subject_mean_dice().size() >= 10) {
    result.outliers = flag_outliers(result.report, opts.outlier_k);
  }

  // report.csv
  result.csv_path = opts.out_dir / "report.csv";
  {
    std::ofstream csv(result.csv_path, std::ios::trunc);
    if (!csv) throw IoError("cannot write " + result.csv_path.string());
    result.report.write_csv(csv);
  }

  // summary.json
  using nlohmann::json;
  json structures = json::array();
  for (const StructureStats& s : result.report.per_structure_stats(&gt_volumes)) {
    json js{{"structure_id", s.structure_id},
            {"structure", s.structure},
            {"count", s.count},
            {"dice_mean", s.dice_mean},
            {"dice_std", s.dice_std}};
    if (std::isfinite(s.asd_mean)) js["asd_mean_mm"] = s.asd_mean;
    if (std::isfinite(s.volume_pearson)) js["volume_pearson"] = s.volume_pearson;
    structures.push_back(js);
  }
  json bins = json::array();
  for (const AgeBin& b : result.age_bins.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"closed_hi", b.closed_hi},
                    {"count", b.values.size()},
                    {"mean", b.mean},
                    {"median", b.median},
                    {"q1", b.q1},
                    {"q3", b.q3}});
  }
  json summary{{"schema_version", 1},
               {"subjects_evaluated",
                result.report.per_subject_mean_dice().size()},
               {"missing_subjects", result.missing_subjects},
               {"csf_ventricles_merged", merged_any},
               {"structures", structures},
               {"age_bins", bins},
               {"unbinned_subjects", result.age_bins.unbinned},
               {"outliers", result.outliers},
               {"outlier_k", opts.outlier_k}};

  result.summary_path = opts.out_dir / "summary.json";
  std::ofstream js(result.summary_path, std::ios::trunc);
  if (!js) throw IoError("cannot write " + result.summary_path.string());
  js << summary.dump(2) << "\n";

  return result;
}

} // namespace synthvox
