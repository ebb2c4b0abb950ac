#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "synthvox/volume.hpp"

namespace synthvox {

/// Overlap similarity 2|X n Y| / (|X| + |Y|) of one structure's masks.
/// Both empty -> 1.0; exactly one empty -> 0.0.
double dice(const LabelVolume& pred, const LabelVolume& gt, int structure);

/// Symmetric mean distance (mm) between mask boundaries. Boundary voxels
/// have at least one face neighbor outside the mask (volume border counts as
/// outside); distances are exact Euclidean between voxel centers.
double average_surface_distance(const LabelVolume& pred, const LabelVolume& gt, int structure);

/// Voxel count times |det| of the affine 3x3 block.
double structure_volume_mm3(const LabelVolume& labels, int structure);

/// Product-moment correlation; needs n >= 3 and nonzero variance on both.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct SubjectRecord {
  std::string subject_id;
  std::optional<double> age_weeks; // post-conception
  std::string contrast;            // T1w | T2w | synthetic | ""
  void validate() const;
};

struct MetricRow {
  std::string subject_id;
  int structure_id = 0;
  std::string structure;
  double dice = 0.0;
  std::optional<double> asd_mm;
  double volume_mm3 = 0.0;
};

struct StructureStats {
  int structure_id = 0;
  std::string structure;
  int count = 0;
  double dice_mean = 0.0, dice_std = 0.0;
  double asd_mean = 0.0;
  double volume_pearson = 0.0; // pred vs gt volumes across subjects, NaN if undefined
};

/// One row per (subject, structure); every aggregate below recomputes from
/// the rows.
struct EvaluationReport {
  std::vector<SubjectRecord> subjects;
  std::vector<MetricRow> rows;

  std::map<std::string, double> per_subject_mean_dice() const;
  std::vector<StructureStats> per_structure_stats(
      const std::map<std::string, std::map<int, double>>* gt_volumes = nullptr) const;

  /// Fixed column order:
  /// subject_id,age_weeks,contrast,structure_id,structure,dice,asd_mm,volume_mm3
  void write_csv(std::ostream& out) const;
};

struct AgeBin {
  double lo = 0.0, hi = 0.0;
  bool closed_hi = false;
  std::vector<std::string> subject_ids;
  std::vector<double> values; // per-subject structure-averaged dice
  double mean = 0.0, median = 0.0, q1 = 0.0, q3 = 0.0;
};

struct AgeBinnedSummary {
  std::vector<AgeBin> bins;
  std::vector<std::string> unbinned; // subjects outside all bins or without age
};

/// Half-open bins [e0,e1) ... with the last bin closed. Default edges
/// 26/32/36/40/45 weeks.
AgeBinnedSummary bin_by_age(const EvaluationReport& report,
                            std::vector<double> edges = {26, 32, 36, 40, 45});

/// Subjects whose mean dice falls below mean - k*std of the population.
std::vector<std::string> flag_outliers(const EvaluationReport& report, double k = 2.5);

} // namespace synthvox
