#include "synthvox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace synthvox {

namespace {

void require_same_grid(const LabelVolume& a, const LabelVolume& b, const char* op) {
  if (!a.geom.same_grid(b.geom)) {
    throw GeometryError(std::string(op) + ": volumes do not share a grid");
  }
}

std::vector<std::uint8_t> mask_of(const LabelVolume& vol, int structure) {
  std::vector<std::uint8_t> m(vol.data.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = vol.data[i] == structure;
  return m;
}

// Mask voxels with a face neighbor outside the mask (or outside the volume).
std::vector<std::uint8_t> boundary_of(const std::vector<std::uint8_t>& mask,
                                      const std::array<int, 3>& dims) {
  std::vector<std::uint8_t> b(mask.size(), 0);
  const auto idx = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) +
                                                static_cast<std::size_t>(dims[1]) * k);
  };
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const std::size_t c = idx(i, j, k);
        if (!mask[c]) continue;
        const bool edge =
            i == 0 || j == 0 || k == 0 || i == dims[0] - 1 || j == dims[1] - 1 ||
            k == dims[2] - 1 || !mask[idx(i - 1, j, k)] || !mask[idx(i + 1, j, k)] ||
            !mask[idx(i, j - 1, k)] || !mask[idx(i, j + 1, k)] || !mask[idx(i, j, k - 1)] ||
            !mask[idx(i, j, k + 1)];
        b[c] = edge;
      }
    }
  }
  return b;
}

// 1D squared-distance transform (lower envelope of parabolas) with physical
// sample positions i * spacing. Infinite f entries contribute no parabola.
void edt_1d(const std::vector<double>& f, double spacing, std::vector<int>& v,
            std::vector<double>& z, std::vector<double>& out) {
  const double inf = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(f.size());
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    const double xq = q * spacing;
    double s = -inf;
    while (k >= 0) {
      const int p = v[k];
      const double xp = p * spacing;
      s = ((f[q] + xq * xq) - (f[p] + xp * xp)) / (2 * xq - 2 * xp);
      if (s > z[k]) break;
      --k;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
    } else {
      ++k;
      v[k] = q;
      z[k] = s;
    }
    z[k + 1] = inf;
  }

  if (k < 0) {
    std::fill(out.begin(), out.begin() + n, inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    const double xq = q * spacing;
    while (z[j + 1] < xq) ++j;
    const double d = xq - v[j] * spacing;
    out[q] = d * d + f[v[j]];
  }
}

// Exact squared Euclidean distance (mm^2) to the nearest set voxel center.
std::vector<double> squared_edt(const std::vector<std::uint8_t>& set,
                                const std::array<int, 3>& dims,
                                const std::array<double, 3>& spacing) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) d[i] = set[i] ? 0.0 : inf;

  const int maxdim = std::max({dims[0], dims[1], dims[2]});
  std::vector<double> f(maxdim), out(maxdim), z(maxdim + 1);
  std::vector<int> v(maxdim);

  const auto idx = [&](int i, int j, int k) {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) +
                                                static_cast<std::size_t>(dims[1]) * k);
  };

  // x pass
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      f.resize(dims[0]);
      out.resize(dims[0]);
      for (int i = 0; i < dims[0]; ++i) f[i] = d[idx(i, j, k)];
      edt_1d(f, spacing[0], v, z, out);
      for (int i = 0; i < dims[0]; ++i) d[idx(i, j, k)] = out[i];
    }
  }
  // y pass
  for (int k = 0; k < dims[2]; ++k) {
    for (int i = 0; i < dims[0]; ++i) {
      f.resize(dims[1]);
      out.resize(dims[1]);
      for (int j = 0; j < dims[1]; ++j) f[j] = d[idx(i, j, k)];
      edt_1d(f, spacing[1], v, z, out);
      for (int j = 0; j < dims[1]; ++j) d[idx(i, j, k)] = out[j];
    }
  }
  // z pass
  for (int j = 0; j < dims[1]; ++j) {
    for (int i = 0; i < dims[0]; ++i) {
      f.resize(dims[2]);
      out.resize(dims[2]);
      for (int k = 0; k < dims[2]; ++k) f[k] = d[idx(i, j, k)];
      edt_1d(f, spacing[2], v, z, out);
      for (int k = 0; k < dims[2]; ++k) d[idx(i, j, k)] = out[k];
    }
  }
  return d;
}

} // namespace

double dice(const LabelVolume& pred, const LabelVolume& gt, int structure) {
  require_same_grid(pred, gt, "dice");
  std::size_t np = 0, ng = 0, inter = 0;
  for (std::size_t i = 0; i < pred.data.size(); ++i) {
    const bool p = pred.data[i] == structure;
    const bool g = gt.data[i] == structure;
    np += p;
    ng += g;
    inter += p && g;
  }
  if (np == 0 && ng == 0) return 1.0; // agreement on absence
  if (np == 0 || ng == 0) return 0.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

double average_surface_distance(const LabelVolume& pred, const LabelVolume& gt, int structure) {
  require_same_grid(pred, gt, "average_surface_distance");
  const auto mp = mask_of(pred, structure);
  const auto mg = mask_of(gt, structure);
  if (std::find(mp.begin(), mp.end(), 1) == mp.end() ||
      std::find(mg.begin(), mg.end(), 1) == mg.end()) {
    throw Error("average_surface_distance: empty mask for structure " + std::to_string(structure));
  }

  const auto bp = boundary_of(mp, pred.geom.dims);
  const auto bg = boundary_of(mg, gt.geom.dims);
  const auto dist_to_bg = squared_edt(bg, gt.geom.dims, gt.geom.spacing);
  const auto dist_to_bp = squared_edt(bp, pred.geom.dims, pred.geom.spacing);

  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < bp.size(); ++i) {
    if (bp[i]) {
      acc += std::sqrt(dist_to_bg[i]);
      ++count;
    }
    if (bg[i]) {
      acc += std::sqrt(dist_to_bp[i]);
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

double structure_volume_mm3(const LabelVolume& labels, int structure) {
  std::size_t n = 0;
  for (const auto v : labels.data) n += v == structure;
  const double voxel = std::abs(labels.geom.affine.topLeftCorner<3, 3>().determinant());
  return static_cast<double>(n) * voxel;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 3) throw Error("pearson: need at least 3 points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

void SubjectRecord::validate() const {
  if (subject_id.empty()) throw Error("subject record: empty id");
  if (age_weeks && (*age_weeks < 20.0 || *age_weeks > 50.0)) {
    throw Error("subject " + subject_id + ": age_weeks " + std::to_string(*age_weeks) +
                " outside [20, 50]");
  }
}

std::map<std::string, double> EvaluationReport::per_subject_mean_dice() const {
  std::map<std::string, std::pair<double, int>> acc;
  for (const MetricRow& r : rows) {
    auto& [sum, n] = acc[r.subject_id];
    sum += r.dice;
    ++n;
  }
  std::map<std::string, double> out;
  for (const auto& [id, sn] : acc) out[id] = sn.first / sn.second;
  return out;
}

std::vector<StructureStats> EvaluationReport::per_structure_stats(
    const std::map<std::string, std::map<int, double>>* gt_volumes) const {
  std::map<int, std::vector<const MetricRow*>> by_structure;
  for (const MetricRow& r : rows) by_structure[r.structure_id].push_back(&r);

  std::vector<StructureStats> out;
  for (const auto& [sid, rws] : by_structure) {
    StructureStats s;
    s.structure_id = sid;
    s.structure = rws.front()->structure;
    s.count = static_cast<int>(rws.size());
    double sum = 0.0, asd_sum = 0.0;
    int asd_n = 0;
    for (const auto* r : rws) {
      sum += r->dice;
      if (r->asd_mm) {
        asd_sum += *r->asd_mm;
        ++asd_n;
      }
    }
    s.dice_mean = sum / s.count;
    double var = 0.0;
    for (const auto* r : rws) var += (r->dice - s.dice_mean) * (r->dice - s.dice_mean);
    s.dice_std = std::sqrt(var / s.count);
    s.asd_mean = asd_n ? asd_sum / asd_n : std::numeric_limits<double>::quiet_NaN();

    s.volume_pearson = std::numeric_limits<double>::quiet_NaN();
    if (gt_volumes) {
      std::vector<double> pv, gv;
      for (const auto* r : rws) {
        const auto subj = gt_volumes->find(r->subject_id);
        if (subj == gt_volumes->end()) continue;
        const auto vol = subj->second.find(sid);
        if (vol == subj->second.end()) continue;
        pv.push_back(r->volume_mm3);
        gv.push_back(vol->second);
      }
      if (pv.size() >= 3) {
        try {
          s.volume_pearson = pearson(pv, gv);
        } catch (const Error&) {
          // zero variance: leave NaN
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void EvaluationReport::write_csv(std::ostream& out) const {
  std::map<std::string, const SubjectRecord*> subj;
  for (const SubjectRecord& s : subjects) subj[s.subject_id] = &s;

  out << "subject_id,age_weeks,contrast,structure_id,structure,dice,asd_mm,volume_mm3\n";
  out.precision(12);
  for (const MetricRow& r : rows) {
    const auto it = subj.find(r.subject_id);
    out << r.subject_id << ",";
    if (it != subj.end() && it->second->age_weeks) out << *it->second->age_weeks;
    out << ",";
    if (it != subj.end()) out << it->second->contrast;
    out << "," << r.structure_id << "," << r.structure << "," << r.dice << ",";
    if (r.asd_mm) out << *r.asd_mm;
    out << "," << r.volume_mm3 << "\n";
  }
}

namespace {

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double pos = p * (sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - lo;
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

} // namespace

AgeBinnedSummary bin_by_age(const EvaluationReport& report, std::vector<double> edges) {
  if (edges.size() < 2) throw Error("bin_by_age: need at least 2 edges");
  AgeBinnedSummary summary;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
    AgeBin bin;
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    bin.closed_hi = b + 2 == edges.size();
    summary.bins.push_back(bin);
  }

  std::map<std::string, const SubjectRecord*> subj;
  for (const SubjectRecord& s : report.subjects) subj[s.subject_id] = &s;

  for (const auto& [id, mean_dice] : report.per_subject_mean_dice()) {
    const auto it = subj.find(id);
    const std::optional<double> age =
        it != subj.end() ? it->second->age_weeks : std::optional<double>{};
    bool placed = false;
    if (age) {
      for (AgeBin& bin : summary.bins) {
        const bool in = *age >= bin.lo && (bin.closed_hi ? *age <= bin.hi : *age < bin.hi);
        if (in) {
          bin.subject_ids.push_back(id);
          bin.values.push_back(mean_dice);
          placed = true;
          break;
        }
      }
    }
    if (!placed) summary.unbinned.push_back(id);
  }

  for (AgeBin& bin : summary.bins) {
    if (bin.values.empty()) continue;
    std::vector<double> sorted = bin.values;
    std::sort(sorted.begin(), sorted.end());
    bin.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / sorted.size();
    bin.median = quantile(sorted, 0.5);
    bin.q1 = quantile(sorted, 0.25);
    bin.q3 = quantile(sorted, 0.75);
  }
  return summary;
}

std::vector<std::string> flag_outliers(const EvaluationReport& report, double k) {
  const auto means = report.per_subject_mean_dice();
  if (means.size() < 10) throw Error("flag_outliers: need at least 10 subjects");

  double mu = 0.0;
  for (const auto& [id, m] : means) mu += m;
  mu /= means.size();
  double var = 0.0;
  for (const auto& [id, m] : means) var += (m - mu) * (m - mu);
  const double sigma = std::sqrt(var / means.size());

  const double threshold = mu - k * sigma;
  std::vector<std::string> flagged;
  if (!std::isfinite(threshold)) return flagged; // k = inf or degenerate
  for (const auto& [id, m] : means) {
    if (m < threshold) flagged.push_back(id);
  }
  return flagged;
}

} // namespace synthvox
