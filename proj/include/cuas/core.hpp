#pragma once

// Domain types shared by every evaluation stage: vectors, time intervals,
// trajectories, detections and tracks.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cuas {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  // Length of the East-North projection.
  double norm_horizontal() const { return std::hypot(x, y); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 lerp(const Vec3& a, const Vec3& b, double f) { return a + (b - a) * f; }

enum class DistanceMode { k2D, k3D };

inline double distance(const Vec3& a, const Vec3& b, DistanceMode mode) {
  const Vec3 d = a - b;
  return mode == DistanceMode::k2D ? d.norm_horizontal() : d.norm();
}

// ---------------------------------------------------------------------------
// Intervals
// ---------------------------------------------------------------------------

/// Seconds since the scenario epoch (t = 0).
using TimeStamp = double;

struct Interval {
  TimeStamp start = 0.0;
  TimeStamp end = 0.0;

  double length() const { return end - start; }
  bool contains(TimeStamp t) const { return start <= t && t <= end; }
  bool operator==(const Interval&) const = default;
};

/// Canonical disjoint union of closed time intervals.
///
/// Intervals are kept sorted by start. Neighbours whose gap is at most
/// kMergeEpsilon are fused, and components shorter than kMergeEpsilon are
/// dropped: the set only tracks measure, so a lone instant carries no
/// duration.
class IntervalSet {
 public:
  static constexpr double kMergeEpsilon = 1e-6;

  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> intervals);
  explicit IntervalSet(std::vector<Interval> intervals);

  static IntervalSet single(TimeStamp start, TimeStamp end) { return IntervalSet{{start, end}}; }

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  std::size_t size() const { return intervals_.size(); }
  const Interval& front() const { return intervals_.front(); }
  const Interval& back() const { return intervals_.back(); }
  auto begin() const { return intervals_.begin(); }
  auto end() const { return intervals_.end(); }

  double duration() const;
  bool contains(TimeStamp t) const;
  // Bounding interval; requires a non-empty set.
  Interval hull() const { return {front().start, back().end}; }

  bool operator==(const IntervalSet&) const = default;

 private:
  void canonicalize();

  std::vector<Interval> intervals_;
};

IntervalSet interval_union(const IntervalSet& a, const IntervalSet& b);
IntervalSet interval_intersect(const IntervalSet& a, const IntervalSet& b);
IntervalSet interval_subtract(const IntervalSet& a, const IntervalSet& b);
double duration(const IntervalSet& a);

inline IntervalSet operator|(const IntervalSet& a, const IntervalSet& b) { return interval_union(a, b); }
inline IntervalSet operator&(const IntervalSet& a, const IntervalSet& b) { return interval_intersect(a, b); }
inline IntervalSet operator-(const IntervalSet& a, const IntervalSet& b) { return interval_subtract(a, b); }

// ---------------------------------------------------------------------------
// Trajectories, detections and tracks
// ---------------------------------------------------------------------------

enum class ObjectClass { kUav, kBird, kOther };

std::string to_string(ObjectClass c);
// Throws ConfigInvalid on an unknown label.
ObjectClass object_class_from_string(const std::string& s);

struct StateSample {
  TimeStamp t = 0.0;
  Vec3 position;
  std::optional<Vec3> velocity;
};

struct Kinematics {
  Vec3 position;
  Vec3 velocity;
};

struct GroundTruthTrajectory {
  std::string object_id;
  ObjectClass class_label = ObjectClass::kUav;
  std::vector<StateSample> samples;
  IntervalSet aoi_presence;

  Interval span() const { return {samples.front().t, samples.back().t}; }
  bool covers(TimeStamp t) const { return !samples.empty() && span().contains(t); }
};

struct Detection {
  std::string detection_id;
  TimeStamp time = 0.0;
  Vec3 position;
  std::string sensor_id;
};

struct TrackSample {
  TimeStamp t = 0.0;
  Vec3 position;
  std::optional<Vec3> velocity;
  std::optional<std::string> ident;
  std::optional<double> confidence;
};

struct Track {
  std::string track_id;
  std::vector<TrackSample> samples;

  Interval span() const { return {samples.front().t, samples.back().t}; }
  // R(t_j): the time range the track exists, as an interval set.
  IntervalSet range() const { return IntervalSet::single(samples.front().t, samples.back().t); }
};

struct SensorPose {
  Vec3 position;
};

/// Interpolated truth state at time t.
///
/// Position is piecewise linear between samples. Velocity is interpolated
/// when both bracketing samples report one, otherwise it falls back to a
/// finite difference of positions: the segment slope strictly between
/// samples, a central difference at interior sample times and a one-sided
/// difference at the ends.
///
/// Throws OutOfRange when t lies outside the sampled span.
Kinematics sample_at(const GroundTruthTrajectory& traj, TimeStamp t);
Kinematics sample_at(std::span<const StateSample> samples, TimeStamp t);

/// Velocity of track sample k: the reported one, else a finite difference
/// of neighbouring track positions. Empty for a single-sample track
/// without a reported velocity.
std::optional<Vec3> track_velocity(const Track& track, std::size_t k);

// Checks the sample-ordering invariants; throws ConfigInvalid on violation.
void validate(const GroundTruthTrajectory& traj);
void validate(const Track& track);

// ---------------------------------------------------------------------------
// Metric results
// ---------------------------------------------------------------------------

/// A metric value, or the reason it is undefined for this input.
struct MetricValue {
  std::optional<double> value;
  std::string reason;

  static MetricValue of(double v) { return {v, {}}; }
  static MetricValue undefined(std::string why) { return {std::nullopt, std::move(why)}; }

  bool defined() const { return value.has_value(); }
  double operator*() const { return *value; }
};

}  // namespace cuas
