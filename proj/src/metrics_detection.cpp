#include "cuas/metrics_detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cuas::detection {

MetricValue location_accuracy(std::size_t i, const DetectionAssociation& assoc, DistanceMode mode) {
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& link : assoc.links) {
    if (link.truth != i) continue;
    const double d = mode == DistanceMode::k2D ? link.distance_2d : link.distance_3d;
    sum_sq += d * d;
    ++n;
  }
  if (n == 0) return MetricValue::undefined("no associated detections");
  return MetricValue::of(std::sqrt(sum_sq / static_cast<double>(n)));
}

namespace {

// Closest distance from `p` to the segment [a, b].
double segment_min_distance(const Vec3& a, const Vec3& b, const Vec3& p) {
  const Vec3 ab = b - a;
  const double len_sq = ab.dot(ab);
  double f = len_sq > 0.0 ? (p - a).dot(ab) / len_sq : 0.0;
  f = std::clamp(f, 0.0, 1.0);
  return (lerp(a, b, f) - p).norm();
}

}  // namespace

RangeExtent flight_path_range(const GroundTruthTrajectory& truth, const SensorPose& sensor) {
  RangeExtent r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const Interval& iv : truth.aoi_presence) {
    std::vector<double> times{iv.start};
    for (const StateSample& s : truth.samples) {
      if (s.t > iv.start && s.t < iv.end) times.push_back(s.t);
    }
    times.push_back(iv.end);
    Vec3 prev = sample_at(truth, times.front()).position;
    r.max_m = std::max(r.max_m, (prev - sensor.position).norm());
    r.min_m = std::min(r.min_m, (prev - sensor.position).norm());
    for (std::size_t k = 1; k < times.size(); ++k) {
      const Vec3 cur = sample_at(truth, times[k]).position;
      r.max_m = std::max(r.max_m, (cur - sensor.position).norm());
      r.min_m = std::min(r.min_m, segment_min_distance(prev, cur, sensor.position));
      prev = cur;
    }
  }
  return r;
}

MetricValue range_ratio(const GroundTruthTrajectory& truth, std::size_t i, std::span<const Detection> detections,
                        const DetectionAssociation& assoc, const SensorPose& sensor, RangeEnd which) {
  double nearest = std::numeric_limits<double>::infinity();
  double farthest = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!assoc.associated(i, j)) continue;
    const double r = (sample_at(truth, detections[j].time).position - sensor.position).norm();
    nearest = std::min(nearest, r);
    farthest = std::max(farthest, r);
    any = true;
  }
  if (!any) return MetricValue::undefined("no associated detections");
  if (truth.aoi_presence.empty()) return MetricValue::undefined("truth never in AoI");

  const RangeExtent path = flight_path_range(truth, sensor);
  const double span = path.max_m - path.min_m;
  if (!(span > 1e-9)) return MetricValue::undefined("degenerate flight-path range");

  const double ratio = which == RangeEnd::kNear ? (path.max_m - nearest) / span : (farthest - path.min_m) / span;
  return MetricValue::of(std::clamp(ratio, 0.0, 1.0));
}

MetricValue detection_precision(const DetectionAssociation& assoc) {
  if (assoc.links.empty()) return MetricValue::undefined("no detections");
  const auto hits = std::count_if(assoc.links.begin(), assoc.links.end(),
                                  [](const DetectionAssociation::Link& l) { return l.truth.has_value(); });
  return MetricValue::of(static_cast<double>(hits) / static_cast<double>(assoc.links.size()));
}

MetricValue detection_immediateness(const GroundTruthTrajectory& truth, std::size_t i,
                                    std::span<const Detection> detections, const DetectionAssociation& assoc) {
  if (truth.aoi_presence.empty()) return MetricValue::undefined("truth never in AoI");
  double first = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (assoc.associated(i, j)) first = std::min(first, detections[j].time);
  }
  if (!std::isfinite(first)) return MetricValue::undefined("no associated detections");
  return MetricValue::of(first - truth.aoi_presence.front().start);
}

Report evaluate(std::span<const GroundTruthTrajectory> truths, std::span<const std::size_t> evaluated,
                std::span<const Detection> detections, const DetectionAssociation& assoc, const SensorPose& sensor) {
  Report report;
  for (std::size_t i : evaluated) {
    const GroundTruthTrajectory& gt = truths[i];
    TruthMetrics m;
    m.object_id = gt.object_id;
    m.location_accuracy_2d = location_accuracy(i, assoc, DistanceMode::k2D);
    m.location_accuracy_3d = location_accuracy(i, assoc, DistanceMode::k3D);
    m.range_ratio_near = range_ratio(gt, i, detections, assoc, sensor, RangeEnd::kNear);
    m.range_ratio_far = range_ratio(gt, i, detections, assoc, sensor, RangeEnd::kFar);
    m.immediateness = detection_immediateness(gt, i, detections, assoc);
    report.per_truth.push_back(std::move(m));
  }
  report.precision = detection_precision(assoc);
  return report;
}

}  // namespace cuas::detection
