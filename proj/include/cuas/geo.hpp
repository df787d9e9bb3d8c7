#pragma once

// Pre-processing: geodetic to local ENU conversion, area-of-interest
// geometry, and time-window / AoI clipping of a trial.

#include <string>
#include <variant>
#include <vector>

#include "cuas/core.hpp"

namespace cuas::geo {

class InvalidCoordinate : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  double alt_m = 0.0;
};

/// WGS-84 local tangent plane anchored at a geodetic origin.
class EnuFrame {
 public:
  explicit EnuFrame(const GeoPoint& origin);

  const GeoPoint& origin() const { return origin_; }

  // Throws InvalidCoordinate when |lat| > 90 or |lon| > 180.
  Vec3 to_enu(const GeoPoint& p) const;
  GeoPoint to_geodetic(const Vec3& enu) const;

 private:
  GeoPoint origin_;
  Vec3 origin_ecef_;
  double sin_lat_, cos_lat_, sin_lon_, cos_lon_;
};

Vec3 geodetic_to_ecef(const GeoPoint& p);
GeoPoint ecef_to_geodetic(const Vec3& ecef);

inline Vec3 geodetic_to_enu(const GeoPoint& p, const GeoPoint& origin) { return EnuFrame(origin).to_enu(p); }

// ---------------------------------------------------------------------------
// Area of interest
// ---------------------------------------------------------------------------

struct Circle {
  Vec3 center;  // only East/North are used
  double radius_m = 0.0;
};

struct Polygon {
  std::vector<Vec3> vertices;  // East/North, implicitly closed
};

class AreaOfInterest {
 public:
  // Throws ConfigInvalid on radius <= 0, a self-intersecting polygon or
  // alt_min >= alt_max.
  AreaOfInterest(std::variant<Circle, Polygon> shape, double alt_min_m, double alt_max_m,
                 bool ignore_altitude = false);

  static AreaOfInterest everywhere();

  bool contains(const Vec3& enu) const;

  const std::variant<Circle, Polygon>& shape() const { return shape_; }
  double alt_min() const { return alt_min_; }
  double alt_max() const { return alt_max_; }
  bool ignores_altitude() const { return ignore_altitude_; }

 private:
  std::variant<Circle, Polygon> shape_;
  double alt_min_;
  double alt_max_;
  bool ignore_altitude_;
};

/// Geodetic AoI description as found in trial files. Altitude bounds are
/// heights above the ENU origin.
struct AoiSpec {
  enum class Shape { kCircle, kPolygon };
  Shape shape = Shape::kCircle;
  GeoPoint center;
  double radius_m = 0.0;
  std::vector<GeoPoint> vertices;
  double alt_min_m = 0.0;
  double alt_max_m = 0.0;
};

AreaOfInterest make_aoi(const AoiSpec& spec, const EnuFrame& frame, bool ignore_altitude);
AoiSpec describe_aoi(const AreaOfInterest& aoi, const EnuFrame& frame);

bool point_in_polygon(const Polygon& poly, double east, double north);
bool polygon_is_simple(const Polygon& poly);

// ---------------------------------------------------------------------------
// Clipping
// ---------------------------------------------------------------------------

/// A trial expressed in the local ENU frame.
struct Scene {
  std::vector<GroundTruthTrajectory> truths;
  std::vector<Detection> detections;
  std::vector<Track> tracks;
  SensorPose sensor;
  Interval window;
};

struct ClipResult {
  Scene scene;
  std::vector<std::string> warnings;
};

/// Times within `window` at which the interpolated truth lies inside the AoI.
///
/// Each sample segment is scanned in sub-steps of at most kPresenceStep
/// seconds; inside/outside transitions are refined by bisection to
/// kCrossingTolerance.
IntervalSet aoi_presence(const GroundTruthTrajectory& truth, const Interval& window, const AreaOfInterest& aoi);

inline constexpr double kPresenceStep = 0.1;
inline constexpr double kCrossingTolerance = 1e-7;

/// Drops detections and track samples outside the window, fills
/// aoi_presence for every truth and removes truths never inside the AoI
/// (each removal is reported in `warnings`).
///
/// Throws EmptyWindow when the window has no positive length.
ClipResult clip_to_window_and_aoi(Scene scene, const Interval& window, const AreaOfInterest& aoi);

}  // namespace cuas::geo
