#pragma once

#include <filesystem>

#include "synthvox/metrics.hpp"

namespace synthvox {

struct EvaluateOptions {
  std::filesystem::path pred_dir;
  std::filesystem::path gt_dir;
  std::filesystem::path subjects_csv; // subject_id[,age_weeks[,contrast]]
  std::filesystem::path out_dir;
  bool merge_csf_ventricles = true; // evaluation-only CSF+Ventricles merge
  double outlier_k = 2.5;
  std::vector<double> age_edges{26, 32, 36, 40, 45};
};

struct EvaluateResult {
  EvaluationReport report;
  std::vector<std::string> missing_subjects; // excluded with a warning
  std::vector<std::string> outliers;         // empty when < 10 subjects
  AgeBinnedSummary age_bins;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

/// Reads <subject>.nii[.gz] from both directories, applies the evaluation
/// merge, computes dice/ASD/volume per structure, and writes report.csv plus
/// summary.json (per-structure stats, pred-vs-gt volume Pearson, age bins,
/// outliers).
EvaluateResult evaluate_directories(const EvaluateOptions& opts);

/// Parses the subjects CSV (header required, columns by name).
std::vector<SubjectRecord> read_subjects_csv(const std::filesystem::path& path);

} // namespace synthvox
