#pragma once

#include <cstdint>
#include <vector>

#include "synthvox/volume.hpp"

namespace synthvox {

struct MotionSpec {
  std::array<double, 2> translation_max_range_mm{3.0, 8.0};
  std::array<double, 2> rotation_max_range_deg{3.0, 8.0};
  std::array<int, 2> n_events_range{1, 3};
  int phase_axis = 1;
  bool demean = true;
  void validate() const;
};

struct MotionSegment {
  double fraction = 0.0; // acquisition fraction at which this pose starts
  RigidTransform pose;
};

/// Piecewise-constant rigid pose over the acquisition, one pose per group of
/// phase-encode lines. Fractions are strictly increasing and start at 0.
struct MotionTrajectory {
  std::vector<MotionSegment> segments;
  int phase_axis = 1;
  double drawn_translation_max_mm = 0.0;
  double drawn_rotation_max_deg = 0.0;

  const RigidTransform& pose_at_fraction(double f) const;
  bool all_identity(double tol = 0.0) const;
  void validate() const;
};

/// Step-event trajectory: K ~ U{n_events_range} pose jumps at random line
/// boundaries. Poses are demeaned so the segment holding the k-space center
/// is identity (when spec.demean), then scaled so the peak translation /
/// rotation norms equal the drawn maxima exactly.
MotionTrajectory sample_trajectory(const MotionSpec& spec, int n_lines, std::uint64_t seed);

/// k-space composite: each segment contributes the phase-encode lines it
/// acquired from the FFT of the rigidly moved image; the output is the
/// magnitude of the inverse FFT. Input background must already be zeroed.
ScalarVolume corrupt(const ScalarVolume& img, const MotionTrajectory& traj);

} // namespace synthvox
