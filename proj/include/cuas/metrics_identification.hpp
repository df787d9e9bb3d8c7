#pragma once

// Duration-based confusion matrix and derived identification scores.

#include <optional>
#include <span>
#include <string>

#include "cuas/association.hpp"
#include "cuas/core.hpp"

namespace cuas::identification {

struct ConfusionDurations {
  double tp_s = 0.0;
  double fp_s = 0.0;
  double fn_s = 0.0;
  std::optional<double> tn_s;  // simulation only
  std::string positive_label;
};

/// Time during which the track is labelled `positive_label`: maximal runs
/// of positively labelled samples, each spanning [first, last] sample.
IntervalSet identification_segments(const Track& track, const std::string& positive_label);

/// Confusion durations over the truths listed in `positives`.
///
/// TP sums, per positive truth, the time covered by at least one associated
/// and positively identified track. FP is positively identified track time
/// not in any such covered time, FN is positive truth presence minus TP.
/// With `with_true_negatives`, TN is track time that is neither identified
/// positive nor associated with a positive truth.
ConfusionDurations confusion_durations(std::span<const GroundTruthTrajectory> truths,
                                       std::span<const std::size_t> positives, std::span<const Track> tracks,
                                       const TrackAssociation& assoc, const std::string& positive_label,
                                       bool with_true_negatives = false);

MetricValue f1(const ConfusionDurations& cd);
MetricValue precision(const ConfusionDurations& cd);
MetricValue recall_pod(const ConfusionDurations& cd);
MetricValue mar(const ConfusionDurations& cd);
MetricValue far(const ConfusionDurations& cd);

struct Report {
  ConfusionDurations confusion;
  MetricValue f1;
  MetricValue precision;
  MetricValue recall_pod;
  MetricValue mar;
  MetricValue far;
};

Report evaluate(std::span<const GroundTruthTrajectory> truths, std::span<const std::size_t> positives,
                std::span<const Track> tracks, const TrackAssociation& assoc, const std::string& positive_label,
                bool with_true_negatives = false);

}  // namespace cuas::identification
