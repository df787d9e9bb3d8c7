#pragma once

// Track-level metrics computed over a TrackAssociation.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cuas/association.hpp"
#include "cuas/core.hpp"

namespace cuas::tracking {

class NoAssociations : public Error {
 public:
  using Error::Error;
};

struct Options {
  // Divide by the full sampled truth span instead of its AoI presence.
  bool use_full_truth_duration = false;
  // Above this many associated tracks a multi-interval A^min falls back to
  // the greedy sweep and is reported as possibly non-minimal.
  std::size_t brute_force_max_tracks = 12;
};

struct TruthMetrics {
  std::string object_id;
  MetricValue completeness;
  MetricValue continuity_per_hour;
  MetricValue ambiguity;
  MetricValue positional_accuracy_2d;
  MetricValue positional_accuracy_3d;
  MetricValue velocity_accuracy;
  MetricValue longest_segment;
  MetricValue immediateness;
  std::vector<std::string> minimal_subset;
  bool minimal_subset_exact = true;
  std::size_t velocity_samples_skipped = 0;
};

struct Report {
  std::vector<TruthMetrics> per_truth;
  MetricValue spuriousness;
};

MetricValue track_completeness(const GroundTruthTrajectory& truth, std::size_t i, const TrackAssociation& assoc,
                               const Options& opts = {});

struct MinimalSubset {
  std::vector<std::size_t> tracks;  // indices into the track list
  bool exact = true;
};

/// Minimum-cardinality set of tracks whose association intervals cover the
/// same time as all of truth i's associations.
///
/// Greedy sweep from the leftmost uncovered instant, taking the candidate
/// that reaches furthest right (ties: longer total association, then lower
/// track_id). Exact when every A_ij is a single interval; multi-interval
/// rows are solved by exhaustive search up to brute_force_max_tracks.
///
/// Throws NoAssociations when truth i has no associated track.
MinimalSubset minimal_association_subset(std::size_t i, const TrackAssociation& assoc, std::span<const Track> tracks,
                                         const Options& opts = {});

/// Track-number changes per hour of tracked time: (|A^min| - 1) / D(∪ A_ij).
MetricValue track_continuity(std::size_t i, const TrackAssociation& assoc, std::span<const Track> tracks,
                             const Options& opts = {});

/// Time-weighted mean number of tracks on truth i while it has at least one.
MetricValue track_ambiguity(std::size_t i, const TrackAssociation& assoc);

/// Time-weighted mean fraction of existing tracks that represent no truth,
/// over the part of the window where at least one track exists.
MetricValue track_spuriousness(std::span<const Track> tracks, const TrackAssociation& assoc, const Interval& window);

/// Per track, RMS distance over associated samples; tracks combined by
/// association duration. Equal track weights when every A_ij has zero
/// duration.
MetricValue track_positional_accuracy(std::size_t i, const TrackAssociation& assoc, DistanceMode mode);

struct VelocityAccuracy {
  MetricValue value;
  std::size_t skipped = 0;  // associated samples without an obtainable velocity
};

/// RMS velocity error over all associated samples of all tracks.
VelocityAccuracy track_velocity_accuracy(const GroundTruthTrajectory& truth, std::size_t i,
                                         std::span<const Track> tracks, const TrackAssociation& assoc);

MetricValue longest_track_segment(const GroundTruthTrajectory& truth, std::size_t i, const TrackAssociation& assoc,
                                  const Options& opts = {});

/// Start of the earliest association minus first AoI entry (late is positive).
MetricValue tracking_immediateness(const GroundTruthTrajectory& truth, std::size_t i, const TrackAssociation& assoc);

Report evaluate(std::span<const GroundTruthTrajectory> truths, std::span<const std::size_t> evaluated,
                std::span<const Track> tracks, const TrackAssociation& assoc, const Interval& window,
                const Options& opts = {});

}  // namespace cuas::tracking
