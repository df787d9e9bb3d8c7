#pragma once

// Ground-truth association for detections and track samples.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cuas/core.hpp"

namespace cuas {

struct AssociationParams {
  double gate_m = 50.0;
  double min_segment_s = 1.0;
};

/// Detection j is associated with at most one truth.
struct DetectionAssociation {
  struct Link {
    std::optional<std::size_t> truth;
    double distance_2d = 0.0;
    double distance_3d = 0.0;
  };

  std::size_t truth_count = 0;
  std::vector<Link> links;  // one per detection

  bool associated(std::size_t i, std::size_t j) const { return links[j].truth == i; }
  bool associated_any(std::size_t j) const { return links[j].truth.has_value(); }
  std::vector<std::size_t> detections_of(std::size_t i) const;
};

/// Interval-valued association between truths and tracks.
struct TrackAssociation {
  struct SampleLink {
    std::optional<std::size_t> truth;
    double distance_2d = 0.0;
    double distance_3d = 0.0;
  };

  std::size_t truth_count = 0;
  std::size_t track_count = 0;
  // intervals[i][j] = A_ij
  std::vector<std::vector<IntervalSet>> intervals;
  // samples[j][k]: truth the k-th sample of track j is associated with.
  std::vector<std::vector<SampleLink>> samples;

  const IntervalSet& interval(std::size_t i, std::size_t j) const { return intervals[i][j]; }
  bool sample_associated(std::size_t i, std::size_t j, std::size_t k) const { return samples[j][k].truth == i; }
  // Tracks with a non-empty association interval for truth i.
  std::vector<std::size_t> tracks_of(std::size_t i) const;
  // Tracks with at least one associated sample for truth i.
  std::vector<std::size_t> tracks_with_samples(std::size_t i) const;
  // Union over j of A_ij.
  IntervalSet covered(std::size_t i) const;
};

/// Nearest-truth association inside a hard 3D gate.
///
/// Candidates are truths whose sampled span covers the detection time. Ties
/// go to the lexicographically lower object_id.
DetectionAssociation associate_detections(std::span<const GroundTruthTrajectory> truths,
                                          std::span<const Detection> detections, double gate_m);

/// Per-sample nearest-truth association, grouped into segments.
///
/// A track sample is a candidate for the truths whose AoI presence contains
/// its time. Runs of consecutive samples bound to the same truth form a
/// segment spanning [first, last] sample time; segments shorter than
/// min_segment_s are discarded. A_ij is the union of kept segments clipped
/// to the truth's AoI presence.
TrackAssociation associate_tracks(std::span<const GroundTruthTrajectory> truths, std::span<const Track> tracks,
                                  const AssociationParams& params);

}  // namespace cuas
