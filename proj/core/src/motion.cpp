#include "synthvox/motion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <set>

#include <fftw3.h>

#include "synthvox/resample.hpp"
#include "synthvox/rng.hpp"

namespace synthvox {

void MotionSpec::validate() const {
  if (translation_max_range_mm[0] > translation_max_range_mm[1] ||
      translation_max_range_mm[0] < 0.0) {
    throw ConfigError("motion: translation_max_range_mm must be ordered and non-negative");
  }
  if (rotation_max_range_deg[0] > rotation_max_range_deg[1] || rotation_max_range_deg[0] < 0.0) {
    throw ConfigError("motion: rotation_max_range_deg must be ordered and non-negative");
  }
  if (n_events_range[0] > n_events_range[1] || n_events_range[0] < 1) {
    throw ConfigError("motion: n_events_range must be ordered and >= 1");
  }
  if (phase_axis < 0 || phase_axis > 2) throw ConfigError("motion: phase_axis must be 0, 1 or 2");
}

const RigidTransform& MotionTrajectory::pose_at_fraction(double f) const {
  if (segments.empty()) throw Error("motion trajectory has no segments");
  std::size_t s = 0;
  while (s + 1 < segments.size() && segments[s + 1].fraction <= f) ++s;
  return segments[s].pose;
}

bool MotionTrajectory::all_identity(double tol) const {
  return std::all_of(segments.begin(), segments.end(),
                     [&](const MotionSegment& s) { return s.pose.is_identity(tol); });
}

void MotionTrajectory::validate() const {
  if (segments.empty()) throw Error("motion trajectory has no segments");
  if (segments.front().fraction != 0.0) {
    throw Error("motion trajectory must start at fraction 0");
  }
  for (std::size_t s = 1; s < segments.size(); ++s) {
    if (!(segments[s].fraction > segments[s - 1].fraction)) {
      throw Error("motion trajectory fractions must be strictly increasing");
    }
    if (segments[s].fraction > 1.0) throw Error("motion trajectory fraction > 1");
  }
  if (phase_axis < 0 || phase_axis > 2) throw Error("motion trajectory: bad phase axis");
}

MotionTrajectory sample_trajectory(const MotionSpec& spec, int n_lines, std::uint64_t seed) {
  spec.validate();
  if (n_lines < 2) throw Error("sample_trajectory: need at least 2 phase-encode lines");

  RngEngine eng(seed);
  const double t_max = uniform(eng, spec.translation_max_range_mm[0], spec.translation_max_range_mm[1]);
  const double r_max = uniform(eng, spec.rotation_max_range_deg[0], spec.rotation_max_range_deg[1]);
  const int max_events = std::min(spec.n_events_range[1], n_lines - 1);
  const int min_events = std::min(spec.n_events_range[0], max_events);
  const int n_events = static_cast<int>(uniform_int(eng, min_events, max_events));

  // Event boundaries snap to whole phase-encode lines.
  std::set<int> boundaries;
  while (static_cast<int>(boundaries.size()) < n_events) {
    boundaries.insert(static_cast<int>(uniform_int(eng, 1, n_lines - 1)));
  }

  // Cumulative pose: each event adds an isotropic random step.
  NormalSampler gauss;
  const auto random_direction = [&]() {
    Eigen::Vector3d d{gauss(eng), gauss(eng), gauss(eng)};
    const double n = d.norm();
    return n > 0.0 ? Eigen::Vector3d(d / n) : Eigen::Vector3d::UnitX();
  };

  std::vector<MotionSegment> segs;
  segs.push_back({0.0, RigidTransform{}});
  Eigen::Vector3d cur_t = Eigen::Vector3d::Zero();
  Eigen::Vector3d cur_r = Eigen::Vector3d::Zero();
  for (const int line : boundaries) {
    cur_t += random_direction() * uniform01(eng);
    cur_r += random_direction() * uniform01(eng);
    MotionSegment s;
    s.fraction = static_cast<double>(line) / n_lines;
    s.pose.translation_mm = cur_t;
    s.pose.rotation_deg = cur_r;
    segs.push_back(s);
  }

  MotionTrajectory traj;
  traj.segments = std::move(segs);
  traj.phase_axis = spec.phase_axis;
  traj.drawn_translation_max_mm = t_max;
  traj.drawn_rotation_max_deg = r_max;

  if (spec.demean) {
    // Re-base so the segment holding the k-space center line is identity.
    const int center_line = n_lines / 2;
    const double center_fraction = (center_line + 0.5) / n_lines;
    const RigidTransform center = traj.pose_at_fraction(center_fraction);
    for (MotionSegment& s : traj.segments) {
      s.pose.translation_mm -= center.translation_mm;
      s.pose.rotation_deg -= center.rotation_deg;
    }
  }

  // Scale so peak norms hit the drawn maxima exactly (after demeaning).
  double peak_t = 0.0, peak_r = 0.0;
  for (const MotionSegment& s : traj.segments) {
    peak_t = std::max(peak_t, s.pose.translation_mm.norm());
    peak_r = std::max(peak_r, s.pose.rotation_deg.norm());
  }
  const double st = peak_t > 1e-12 ? t_max / peak_t : 0.0;
  const double sr = peak_r > 1e-12 ? r_max / peak_r : 0.0;
  for (MotionSegment& s : traj.segments) {
    s.pose.translation_mm *= st;
    s.pose.rotation_deg *= sr;
  }

  traj.validate();
  return traj;
}

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  fftwf_complex* data = nullptr;
  explicit FftwBuffer(std::size_t n) {
    data = fftwf_alloc_complex(n);
    if (!data) throw Error("fftw allocation failed");
  }
  ~FftwBuffer() { fftwf_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

void fft3_inplace(fftwf_complex* buf, const std::array<int, 3>& dims, int sign) {
  fftwf_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    // Our layout is x-fastest, FFTW wants row-major: pass dims reversed.
    plan = fftwf_plan_dft_3d(dims[2], dims[1], dims[0], buf, buf, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw Error("fftw plan creation failed");
  fftwf_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftwf_destroy_plan(plan);
  }
}

} // namespace

ScalarVolume corrupt(const ScalarVolume& img, const MotionTrajectory& traj) {
  traj.validate();
  img.validate();

  const std::array<int, 3>& dims = img.geom.dims;
  const int axis = traj.phase_axis;
  const int n_lines = dims[axis];
  const std::size_t n = img.geom.voxel_count();

  // Acquisition order is linear across the shifted spectrum: line l holds
  // frequency index (l + ceil(n/2)) mod n, so the center line is DC.
  const int offset = (n_lines + 1) / 2;

  // Segment owning each acquired line.
  std::vector<int> segment_of_line(n_lines);
  for (int l = 0; l < n_lines; ++l) {
    const double f = (l + 0.5) / n_lines;
    std::size_t s = 0;
    while (s + 1 < traj.segments.size() && traj.segments[s + 1].fraction <= f) ++s;
    segment_of_line[l] = static_cast<int>(s);
  }

  FftwBuffer composite(n);
  FftwBuffer work(n);

  const std::size_t stride[3] = {1, static_cast<std::size_t>(dims[0]),
                                 static_cast<std::size_t>(dims[0]) * dims[1]};

  for (std::size_t seg = 0; seg < traj.segments.size(); ++seg) {
    // Lines acquired during this segment (in frequency-index space).
    std::vector<int> freq_planes;
    for (int l = 0; l < n_lines; ++l) {
      if (segment_of_line[l] == static_cast<int>(seg)) {
        freq_planes.push_back((l + offset) % n_lines);
      }
    }
    if (freq_planes.empty()) continue;

    const ScalarVolume moved =
        apply_rigid(img, traj.segments[seg].pose, Interp::trilinear, 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
      work.data[i][0] = moved.data[i];
      work.data[i][1] = 0.0f;
    }
    fft3_inplace(work.data, dims, FFTW_FORWARD);

    // Copy the segment's phase-encode planes into the composite spectrum.
    const int d0 = dims[0], d1 = dims[1], d2 = dims[2];
    for (const int p : freq_planes) {
      if (axis == 0) {
        for (int k = 0; k < d2; ++k) {
          for (int j = 0; j < d1; ++j) {
            const std::size_t i = p * stride[0] + j * stride[1] + k * stride[2];
            composite.data[i][0] = work.data[i][0];
            composite.data[i][1] = work.data[i][1];
          }
        }
      } else if (axis == 1) {
        for (int k = 0; k < d2; ++k) {
          const std::size_t row = p * stride[1] + k * stride[2];
          std::copy_n(&work.data[row][0], 2 * static_cast<std::size_t>(d0),
                      &composite.data[row][0]);
        }
      } else {
        const std::size_t plane = p * stride[2];
        std::copy_n(&work.data[plane][0], 2 * static_cast<std::size_t>(d0) * d1,
                    &composite.data[plane][0]);
      }
    }
  }

  fft3_inplace(composite.data, dims, FFTW_BACKWARD);

  ScalarVolume out(img.geom);
  const float scale = 1.0f / static_cast<float>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float re = composite.data[i][0] * scale;
    const float im = composite.data[i][1] * scale;
    out.data[i] = std::sqrt(re * re + im * im);
  }
  return out;
}

} // namespace synthvox
