#include "cuas/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cuas::geo {

namespace {

constexpr double kSemiMajor = 6378137.0;
constexpr double kFlattening = 1.0 / 298.257223563;
constexpr double kEccSq = kFlattening * (2.0 - kFlattening);

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

void check(const GeoPoint& p) {
  if (!std::isfinite(p.lat_deg) || !std::isfinite(p.lon_deg) || !std::isfinite(p.alt_m) ||
      std::abs(p.lat_deg) > 90.0 || std::abs(p.lon_deg) > 180.0) {
    throw InvalidCoordinate("invalid geodetic coordinate (" + std::to_string(p.lat_deg) + ", " +
                            std::to_string(p.lon_deg) + ")");
  }
}

}  // namespace

Vec3 geodetic_to_ecef(const GeoPoint& p) {
  check(p);
  const double lat = deg2rad(p.lat_deg);
  const double lon = deg2rad(p.lon_deg);
  const double n = kSemiMajor / std::sqrt(1.0 - kEccSq * std::sin(lat) * std::sin(lat));
  return {(n + p.alt_m) * std::cos(lat) * std::cos(lon), (n + p.alt_m) * std::cos(lat) * std::sin(lon),
          (n * (1.0 - kEccSq) + p.alt_m) * std::sin(lat)};
}

GeoPoint ecef_to_geodetic(const Vec3& ecef) {
  const double p = std::hypot(ecef.x, ecef.y);
  const double lon = std::atan2(ecef.y, ecef.x);
  double lat = std::atan2(ecef.z, p * (1.0 - kEccSq));
  double h = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double s = std::sin(lat);
    const double n = kSemiMajor / std::sqrt(1.0 - kEccSq * s * s);
    // Height from whichever projection is better conditioned at this latitude.
    h = std::abs(std::cos(lat)) > 1e-3 ? p / std::cos(lat) - n : ecef.z / s - n * (1.0 - kEccSq);
    lat = std::atan2(ecef.z, p * (1.0 - kEccSq * n / (n + h)));
  }
  return {rad2deg(lat), rad2deg(lon), h};
}

EnuFrame::EnuFrame(const GeoPoint& origin) : origin_(origin), origin_ecef_(geodetic_to_ecef(origin)) {
  const double lat = deg2rad(origin.lat_deg);
  const double lon = deg2rad(origin.lon_deg);
  sin_lat_ = std::sin(lat);
  cos_lat_ = std::cos(lat);
  sin_lon_ = std::sin(lon);
  cos_lon_ = std::cos(lon);
}

Vec3 EnuFrame::to_enu(const GeoPoint& p) const {
  const Vec3 d = geodetic_to_ecef(p) - origin_ecef_;
  return {-sin_lon_ * d.x + cos_lon_ * d.y,
          -sin_lat_ * cos_lon_ * d.x - sin_lat_ * sin_lon_ * d.y + cos_lat_ * d.z,
          cos_lat_ * cos_lon_ * d.x + cos_lat_ * sin_lon_ * d.y + sin_lat_ * d.z};
}

GeoPoint EnuFrame::to_geodetic(const Vec3& e) const {
  const Vec3 d{-sin_lon_ * e.x - sin_lat_ * cos_lon_ * e.y + cos_lat_ * cos_lon_ * e.z,
               cos_lon_ * e.x - sin_lat_ * sin_lon_ * e.y + cos_lat_ * sin_lon_ * e.z,
               cos_lat_ * e.y + sin_lat_ * e.z};
  return ecef_to_geodetic(origin_ecef_ + d);
}

// ---------------------------------------------------------------------------
// Area of interest
// ---------------------------------------------------------------------------

namespace {

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

bool segments_intersect(const Vec3& p1, const Vec3& p2, const Vec3& q1, const Vec3& q2) {
  auto orient = [](const Vec3& a, const Vec3& b, const Vec3& c) {
    const double v = cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y);
    return (v > 0) - (v < 0);
  };
  auto on_segment = [](const Vec3& a, const Vec3& b, const Vec3& c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
           c.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

}  // namespace

bool polygon_is_simple(const Polygon& poly) {
  const auto& v = poly.vertices;
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool point_in_polygon(const Polygon& poly, double east, double north) {
  const auto& v = poly.vertices;
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > north) != (v[j].y > north)) {
      const double x_cross = v[j].x + (north - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (east < x_cross) inside = !inside;
    }
  }
  return inside;
}

AreaOfInterest::AreaOfInterest(std::variant<Circle, Polygon> shape, double alt_min_m, double alt_max_m,
                               bool ignore_altitude)
    : shape_(std::move(shape)), alt_min_(alt_min_m), alt_max_(alt_max_m), ignore_altitude_(ignore_altitude) {
  if (!(alt_min_ < alt_max_)) throw ConfigInvalid("AoI altitude bounds require min < max");
  if (const auto* c = std::get_if<Circle>(&shape_)) {
    if (!(c->radius_m > 0.0)) throw ConfigInvalid("AoI circle radius must be positive");
  } else if (!polygon_is_simple(std::get<Polygon>(shape_))) {
    throw ConfigInvalid("AoI polygon must have >= 3 vertices and not self-intersect");
  }
}

AreaOfInterest AreaOfInterest::everywhere() {
  return AreaOfInterest(Circle{{}, 1e12}, -1e12, 1e12, true);
}

bool AreaOfInterest::contains(const Vec3& p) const {
  if (!ignore_altitude_ && (p.z < alt_min_ || p.z > alt_max_)) return false;
  if (const auto* c = std::get_if<Circle>(&shape_)) {
    return std::hypot(p.x - c->center.x, p.y - c->center.y) <= c->radius_m;
  }
  return point_in_polygon(std::get<Polygon>(shape_), p.x, p.y);
}

AreaOfInterest make_aoi(const AoiSpec& spec, const EnuFrame& frame, bool ignore_altitude) {
  auto horizontal = [&](const GeoPoint& g) {
    const Vec3 e = frame.to_enu({g.lat_deg, g.lon_deg, frame.origin().alt_m});
    return Vec3{e.x, e.y, 0.0};
  };
  if (spec.shape == AoiSpec::Shape::kCircle) {
    return AreaOfInterest(Circle{horizontal(spec.center), spec.radius_m}, spec.alt_min_m, spec.alt_max_m,
                          ignore_altitude);
  }
  Polygon poly;
  for (const GeoPoint& v : spec.vertices) poly.vertices.push_back(horizontal(v));
  return AreaOfInterest(std::move(poly), spec.alt_min_m, spec.alt_max_m, ignore_altitude);
}

AoiSpec describe_aoi(const AreaOfInterest& aoi, const EnuFrame& frame) {
  AoiSpec spec;
  spec.alt_min_m = aoi.alt_min();
  spec.alt_max_m = aoi.alt_max();
  auto geodetic = [&](const Vec3& e) {
    GeoPoint g = frame.to_geodetic({e.x, e.y, 0.0});
    g.alt_m = 0.0;
    return g;
  };
  if (const auto* c = std::get_if<Circle>(&aoi.shape())) {
    spec.shape = AoiSpec::Shape::kCircle;
    spec.center = geodetic(c->center);
    spec.radius_m = c->radius_m;
  } else {
    spec.shape = AoiSpec::Shape::kPolygon;
    for (const Vec3& v : std::get<Polygon>(aoi.shape()).vertices) spec.vertices.push_back(geodetic(v));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Clipping
// ---------------------------------------------------------------------------

IntervalSet aoi_presence(const GroundTruthTrajectory& truth, const Interval& window, const AreaOfInterest& aoi) {
  const double lo = std::max(window.start, truth.samples.front().t);
  const double hi = std::min(window.end, truth.samples.back().t);
  if (!(lo < hi)) return {};

  auto inside = [&](double t) { return aoi.contains(sample_at(truth, t).position); };
  auto refine = [&](double a, double b, bool a_inside) {
    while (b - a > kCrossingTolerance) {
      const double mid = 0.5 * (a + b);
      (inside(mid) == a_inside ? a : b) = mid;
    }
    return 0.5 * (a + b);
  };

  // Evaluation grid: clipped span end points, every sample time in between,
  // and sub-steps so no bracket exceeds kPresenceStep.
  std::vector<double> grid{lo};
  for (const StateSample& s : truth.samples) {
    if (s.t <= lo) continue;
    if (s.t >= hi) break;
    grid.push_back(s.t);
  }
  grid.push_back(hi);
  std::vector<double> times;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double span = grid[k + 1] - grid[k];
    const int steps = std::max(1, static_cast<int>(std::ceil(span / kPresenceStep)));
    for (int s = 0; s < steps; ++s) times.push_back(grid[k] + span * s / steps);
  }
  times.push_back(hi);

  std::vector<Interval> runs;
  bool prev_inside = inside(times.front());
  double run_start = times.front();
  for (std::size_t k = 1; k < times.size(); ++k) {
    const bool now = inside(times[k]);
    if (now != prev_inside) {
      const double crossing = refine(times[k - 1], times[k], prev_inside);
      if (prev_inside) {
        runs.push_back({run_start, crossing});
      } else {
        run_start = crossing;
      }
      prev_inside = now;
    }
  }
  if (prev_inside) runs.push_back({run_start, hi});
  return IntervalSet(std::move(runs));
}

ClipResult clip_to_window_and_aoi(Scene scene, const Interval& window, const AreaOfInterest& aoi) {
  if (!(window.end > window.start)) {
    throw EmptyWindow("time window [" + std::to_string(window.start) + ", " + std::to_string(window.end) +
                      "] is empty");
  }
  ClipResult out;
  scene.window = window;

  std::erase_if(scene.detections, [&](const Detection& d) { return !window.contains(d.time); });

  for (Track& track : scene.tracks) {
    std::erase_if(track.samples, [&](const TrackSample& s) { return !window.contains(s.t); });
  }
  std::erase_if(scene.tracks, [](const Track& t) { return t.samples.empty(); });

  std::vector<GroundTruthTrajectory> kept;
  for (GroundTruthTrajectory& truth : scene.truths) {
    truth.aoi_presence = aoi_presence(truth, window, aoi);
    if (truth.aoi_presence.empty()) {
      out.warnings.push_back("ground truth '" + truth.object_id + "' never inside AoI and window; dropped");
      continue;
    }
    kept.push_back(std::move(truth));
  }
  scene.truths = std::move(kept);
  out.scene = std::move(scene);
  return out;
}

}  // namespace cuas::geo
