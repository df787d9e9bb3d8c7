#pragma once

// Detection-level metrics computed over a DetectionAssociation.

#include <span>
#include <string>
#include <vector>

#include "cuas/association.hpp"
#include "cuas/core.hpp"

namespace cuas::detection {

enum class RangeEnd { kNear, kFar };

struct TruthMetrics {
  std::string object_id;
  MetricValue location_accuracy_2d;
  MetricValue location_accuracy_3d;
  MetricValue range_ratio_near;
  MetricValue range_ratio_far;
  MetricValue immediateness;
};

struct Report {
  std::vector<TruthMetrics> per_truth;
  MetricValue precision;
};

/// RMS truth-to-detection distance over the detections associated with
/// truth i. Undefined without associated detections.
MetricValue location_accuracy(std::size_t i, const DetectionAssociation& assoc, DistanceMode mode);

struct RangeExtent {
  double min_m = 0.0;
  double max_m = 0.0;
};

/// Smallest and largest sensor distance of the truth's flight path over its
/// AoI presence, exact for the piecewise-linear trajectory.
RangeExtent flight_path_range(const GroundTruthTrajectory& truth, const SensorPose& sensor);

/// Near/far range ratio. Detection ranges use the interpolated truth
/// position at each associated detection's timestamp; both ratios are 1
/// when the associated detections reach the matching flight-path extreme.
MetricValue range_ratio(const GroundTruthTrajectory& truth, std::size_t i, std::span<const Detection> detections,
                        const DetectionAssociation& assoc, const SensorPose& sensor, RangeEnd which);

/// Fraction of detections associated with any truth.
MetricValue detection_precision(const DetectionAssociation& assoc);

/// First associated detection time minus first AoI entry (late is positive).
MetricValue detection_immediateness(const GroundTruthTrajectory& truth, std::size_t i,
                                    std::span<const Detection> detections, const DetectionAssociation& assoc);

/// All detection metrics for the truths listed in `evaluated`.
Report evaluate(std::span<const GroundTruthTrajectory> truths, std::span<const std::size_t> evaluated,
                std::span<const Detection> detections, const DetectionAssociation& assoc, const SensorPose& sensor);

}  // namespace cuas::detection
