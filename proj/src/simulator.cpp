#include "cuas/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace cuas::sim {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  return r * std::cos(a);
}

std::uint32_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  const double limit = std::exp(-mean);
  std::uint32_t k = 0;
  double p = uniform();
  while (p > limit) {
    ++k;
    p *= uniform();
  }
  return k;
}

// ---------------------------------------------------------------------------
// Configuration parsing
// ---------------------------------------------------------------------------

namespace {

void only_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigInvalid(std::string(where) + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw ConfigInvalid(std::string(where) + ": unknown field '" + key + "'");
    }
  }
}

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigInvalid("waypoint must be [east, north, up]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Category category_from(const std::string& s) {
  if (s == "sensitive_site") return Category::kSensitiveSite;
  if (s == "public_event") return Category::kPublicEvent;
  if (s == "border") return Category::kBorder;
  throw ConfigInvalid("unknown scenario category '" + s + "'");
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

double wrap360(double deg) {
  double d = std::fmod(deg, 360.0);
  return d < 0.0 ? d + 360.0 : d;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) throw ConfigInvalid("duration_s must be > 0");
  std::set<std::string> ids;
  for (const DroneConfig& d : drones) {
    if (d.id.empty()) throw ConfigInvalid("drone id must be non-empty");
    if (!ids.insert(d.id).second) throw ConfigInvalid("duplicate drone id '" + d.id + "'");
    if (d.waypoints.size() < 2) throw ConfigInvalid("drone '" + d.id + "' needs at least 2 waypoints");
    if (!(d.speed_mps > 0.0) || !std::isfinite(d.speed_mps)) {
      throw ConfigInvalid("drone '" + d.id + "' speed must be > 0");
    }
    if (!finite_nonneg(d.start_s)) throw ConfigInvalid("drone '" + d.id + "' start_s must be >= 0");
    for (const Vec3& w : d.waypoints) {
      if (!w.finite()) throw ConfigInvalid("drone '" + d.id + "' has a non-finite waypoint");
    }
  }
  if (clutter.bird_count < 0) throw ConfigInvalid("clutter.bird_count must be >= 0");
  if (!(clutter.bird_speed_min > 0.0) || clutter.bird_speed_max < clutter.bird_speed_min) {
    throw ConfigInvalid("clutter.bird_speed_range must satisfy 0 < lo <= hi");
  }
  if (!(clutter.bird_area_radius_m > 0.0)) throw ConfigInvalid("clutter.bird_area_radius_m must be > 0");
  if (!finite_nonneg(clutter.spurious_detection_rate_hz)) {
    throw ConfigInvalid("clutter.spurious_detection_rate_hz must be >= 0");
  }
  if (!(association.gate_m > 0.0) || association.min_segment_s < 0.0) {
    throw ConfigInvalid("association parameters out of range");
  }
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  ScenarioConfig cfg;
  try {
    only_keys(j, "scenario",
              {"category", "sensor", "aoi", "duration_s", "drones", "clutter", "rng_seed", "association"});
    cfg.category = category_from(j.value("category", std::string("sensitive_site")));
    cfg.sensor = ingest::parse_geo_point(j.at("sensor"), "sensor");
    cfg.aoi = ingest::parse_aoi(j.at("aoi"));
    cfg.duration_s = j.at("duration_s").get<double>();
    cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
    for (const json& d : j.value("drones", json::array())) {
      only_keys(d, "drone", {"id", "class", "waypoints", "speed_mps", "start_s", "behavior"});
      DroneConfig drone;
      drone.id = d.at("id").get<std::string>();
      drone.class_label = object_class_from_string(d.value("class", std::string("uav")));
      for (const json& w : d.at("waypoints")) drone.waypoints.push_back(vec3(w));
      drone.speed_mps = d.at("speed_mps").get<double>();
      drone.start_s = d.value("start_s", 0.0);
      const std::string behavior = d.value("behavior", std::string("malicious"));
      if (behavior == "malicious") {
        drone.behavior = Behavior::kMalicious;
      } else if (behavior == "neutral") {
        drone.behavior = Behavior::kNeutral;
      } else {
        throw ConfigInvalid("unknown drone behavior '" + behavior + "'");
      }
      cfg.drones.push_back(std::move(drone));
    }
    if (j.contains("clutter")) {
      const json& c = j.at("clutter");
      only_keys(c, "clutter",
                {"bird_count", "bird_speed_range", "bird_area_radius_m", "spurious_detection_rate_hz"});
      cfg.clutter.bird_count = c.value("bird_count", 0);
      if (c.contains("bird_speed_range")) {
        const json& r = c.at("bird_speed_range");
        if (!r.is_array() || r.size() != 2) throw ConfigInvalid("clutter.bird_speed_range must be [lo, hi]");
        cfg.clutter.bird_speed_min = r[0].get<double>();
        cfg.clutter.bird_speed_max = r[1].get<double>();
      }
      cfg.clutter.bird_area_radius_m = c.value("bird_area_radius_m", cfg.clutter.bird_area_radius_m);
      cfg.clutter.spurious_detection_rate_hz = c.value("spurious_detection_rate_hz", 0.0);
    }
    if (j.contains("association")) {
      const json& a = j.at("association");
      only_keys(a, "association", {"gate_m", "min_segment_s"});
      cfg.association.gate_m = a.value("gate_m", cfg.association.gate_m);
      cfg.association.min_segment_s = a.value("min_segment_s", cfg.association.min_segment_s);
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("scenario: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

bool Fov::sees(const Vec3& enu) const {
  if (enu.norm() > max_range_m) return false;
  const double az = wrap360(std::atan2(enu.x, enu.y) * 180.0 / std::numbers::pi);
  if (azimuth_width_deg < 360.0) {
    double off = std::abs(wrap360(az - azimuth_center_deg));
    off = std::min(off, 360.0 - off);
    if (off > azimuth_width_deg / 2.0) return false;
  }
  for (const auto& [from, to] : blind_sectors) {
    if (wrap360(az - from) <= wrap360(to - from)) return false;
  }
  return true;
}

void DtiModelConfig::validate() const {
  if (!(fov.max_range_m > 0.0)) throw ConfigInvalid("fov.max_range_m must be > 0");
  if (!(fov.azimuth_width_deg > 0.0) || fov.azimuth_width_deg > 360.0) {
    throw ConfigInvalid("fov.azimuth_width_deg must be in (0, 360]");
  }
  if (!probability(p_detect)) throw ConfigInvalid("p_detect must be in [0, 1]");
  if (!probability(track_drop_prob)) throw ConfigInvalid("track_drop_prob must be in [0, 1]");
  if (!(scan_period_s > 0.0)) throw ConfigInvalid("scan_period_s must be > 0");
  if (!finite_nonneg(pos_noise_sigma_m)) throw ConfigInvalid("pos_noise_sigma_m must be >= 0");
  if (track_m <= 0 || track_m > track_n) throw ConfigInvalid("track_m_of_n must satisfy 0 < M <= N");
  if (!(track_gate_m > 0.0)) throw ConfigInvalid("track_gate_m must be > 0");
  if (!finite_nonneg(track_coast_s)) throw ConfigInvalid("track_coast_s must be >= 0");
  if (classifier.type == Classifier::Type::kRangeThreshold && !(classifier.range_m > 0.0)) {
    throw ConfigInvalid("classifier.range_m must be > 0");
  }
}

DtiModelConfig DtiModelConfig::preset(const std::string& strategy) {
  DtiModelConfig c;
  c.name = strategy;
  if (strategy == "A") {
    // Long-range all-round radar-like sensor with a perfect classifier.
  } else if (strategy == "B") {
    c.fov = {0.0, 120.0, 1500.0, {}};
    c.p_detect = 0.8;
    c.pos_noise_sigma_m = 10.0;
    c.track_m = 3;
    c.track_n = 5;
    c.track_gate_m = 60.0;
    c.track_drop_prob = 0.01;
    c.track_coast_s = 5.0;
    c.classifier = {Classifier::Type::kRangeThreshold, 800.0};
  } else if (strategy == "C") {
    c.fov.max_range_m = 500.0;
    c.p_detect = 0.95;
    c.pos_noise_sigma_m = 2.0;
    c.track_gate_m = 30.0;
    c.track_drop_prob = 0.02;
    c.track_coast_s = 2.0;
    c.classifier = {Classifier::Type::kAlwaysPositive, 0.0};
  } else {
    throw ConfigInvalid("unknown strategy '" + strategy + "' (expected A, B or C)");
  }
  return c;
}

DtiModelConfig DtiModelConfig::from_json(const json& j) {
  DtiModelConfig c;
  try {
    only_keys(j, "dti_model",
              {"strategy", "name", "fov", "p_detect", "scan_period_s", "pos_noise_sigma_m", "track_m_of_n",
               "track_gate_m", "track_drop_prob", "track_coast_s", "classifier"});
    c = preset(j.value("strategy", std::string("A")));
    c.name = j.value("name", c.name);
    if (j.contains("fov")) {
      const json& f = j.at("fov");
      only_keys(f, "fov", {"azimuth_center_deg", "azimuth_width_deg", "max_range_m", "blind_sectors"});
      c.fov.azimuth_center_deg = f.value("azimuth_center_deg", c.fov.azimuth_center_deg);
      c.fov.azimuth_width_deg = f.value("azimuth_width_deg", c.fov.azimuth_width_deg);
      c.fov.max_range_m = f.value("max_range_m", c.fov.max_range_m);
      if (f.contains("blind_sectors")) {
        c.fov.blind_sectors.clear();
        for (const json& s : f.at("blind_sectors")) {
          if (!s.is_array() || s.size() != 2) throw ConfigInvalid("blind sector must be [from_deg, to_deg]");
          c.fov.blind_sectors.push_back({s[0].get<double>(), s[1].get<double>()});
        }
      }
    }
    c.p_detect = j.value("p_detect", c.p_detect);
    c.scan_period_s = j.value("scan_period_s", c.scan_period_s);
    c.pos_noise_sigma_m = j.value("pos_noise_sigma_m", c.pos_noise_sigma_m);
    if (j.contains("track_m_of_n")) {
      const json& mn = j.at("track_m_of_n");
      if (!mn.is_array() || mn.size() != 2) throw ConfigInvalid("track_m_of_n must be [M, N]");
      c.track_m = mn[0].get<int>();
      c.track_n = mn[1].get<int>();
    }
    c.track_gate_m = j.value("track_gate_m", c.track_gate_m);
    c.track_drop_prob = j.value("track_drop_prob", c.track_drop_prob);
    c.track_coast_s = j.value("track_coast_s", c.track_coast_s);
    if (j.contains("classifier")) {
      const json& k = j.at("classifier");
      only_keys(k, "classifier", {"type", "range_m"});
      const std::string type = k.at("type").get<std::string>();
      if (type == "perfect") {
        c.classifier = {Classifier::Type::kPerfect, 0.0};
      } else if (type == "always_positive") {
        c.classifier = {Classifier::Type::kAlwaysPositive, 0.0};
      } else if (type == "range_threshold") {
        c.classifier = {Classifier::Type::kRangeThreshold, k.at("range_m").get<double>()};
      } else {
        throw ConfigInvalid("unknown classifier '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("dti_model: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Truth generation
// ---------------------------------------------------------------------------

namespace {

// Position after travelling `dist` metres along the polyline.
Vec3 along_path(const std::vector<Vec3>& wp, double dist) {
  for (std::size_t k = 0; k + 1 < wp.size(); ++k) {
    const double leg = (wp[k + 1] - wp[k]).norm();
    if (dist <= leg) return leg > 0.0 ? lerp(wp[k], wp[k + 1], dist / leg) : wp[k];
    dist -= leg;
  }
  return wp.back();
}

double path_length(const std::vector<Vec3>& wp) {
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < wp.size(); ++k) len += (wp[k + 1] - wp[k]).norm();
  return len;
}

GroundTruthTrajectory drone_truth(const DroneConfig& d, double duration) {
  GroundTruthTrajectory gt;
  gt.object_id = d.id;
  gt.class_label = d.class_label;
  const double t0 = d.start_s;
  const double t1 = std::min(duration, t0 + path_length(d.waypoints) / d.speed_mps);
  auto at = [&](double t) { return StateSample{t, along_path(d.waypoints, d.speed_mps * (t - t0)), std::nullopt}; };

  // 10 Hz grid points k / 10 inside [t0, t1], plus the exact end points.
  constexpr double kEps = 1e-9;
  gt.samples.push_back(at(t0));
  for (long k = static_cast<long>(std::floor(t0 * kTruthRateHz)) + 1;; ++k) {
    const double t = static_cast<double>(k) / kTruthRateHz;
    if (t > t1 + kEps) break;
    if (t <= gt.samples.back().t + kEps) continue;
    gt.samples.push_back(at(std::min(t, t1)));
  }
  if (t1 > gt.samples.back().t + kEps) gt.samples.push_back(at(t1));
  if (gt.samples.size() < 2) throw ConfigInvalid("drone '" + d.id + "' has no flight time inside the scenario");
  return gt;
}

GroundTruthTrajectory bird_truth(int index, const ClutterConfig& c, double duration, Rng& rng) {
  GroundTruthTrajectory gt;
  gt.object_id = "bird-" + std::to_string(index + 1);
  gt.class_label = ObjectClass::kBird;
  const double r = c.bird_area_radius_m * std::sqrt(rng.uniform());
  const double bearing = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Vec3 p{r * std::sin(bearing), r * std::cos(bearing), rng.uniform(20.0, 120.0)};
  const double speed = rng.uniform(c.bird_speed_min, c.bird_speed_max);
  double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dt = 1.0 / kTruthRateHz;
  const long steps = static_cast<long>(std::floor(duration * kTruthRateHz + 1e-9));
  for (long k = 0; k <= steps; ++k) {
    gt.samples.push_back({static_cast<double>(k) / kTruthRateHz, p, std::nullopt});
    heading += 0.05 * rng.normal();
    p = p + Vec3{std::sin(heading), std::cos(heading), 0.0} * (speed * dt);
  }
  return gt;
}

}  // namespace

std::vector<GroundTruthTrajectory> generate_truth(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<GroundTruthTrajectory> out;
  for (const DroneConfig& d : cfg.drones) out.push_back(drone_truth(d, cfg.duration_s));
  Rng rng(derive_seed(seed, 0));
  for (int b = 0; b < cfg.clutter.bird_count; ++b) out.push_back(bird_truth(b, cfg.clutter, cfg.duration_s, rng));
  return out;
}

// ---------------------------------------------------------------------------
// DTI model
// ---------------------------------------------------------------------------

namespace {

struct Measurement {
  Detection detection;
  std::optional<std::size_t> source;  // truth index; nullopt for clutter
};

struct TrackerTrack {
  std::vector<TrackSample> samples;
  std::vector<bool> hits;  // one entry per scan since creation
  bool confirmed = false;
  std::string id;

  Vec3 predict(double t) const {
    const TrackSample& last = samples.back();
    if (samples.size() < 2) return last.position;
    const TrackSample& prev = samples[samples.size() - 2];
    const Vec3 v = (last.position - prev.position) / (last.t - prev.t);
    return last.position + v * (t - last.t);
  }
};

std::optional<std::string> classify(const Classifier& c, const Measurement& m,
                                    const std::vector<GroundTruthTrajectory>& truths) {
  const std::string truth_label = m.source ? to_string(truths[*m.source].class_label) : "other";
  switch (c.type) {
    case Classifier::Type::kPerfect:
      return truth_label;
    case Classifier::Type::kAlwaysPositive:
      return std::string("uav");
    case Classifier::Type::kRangeThreshold:
      if (m.detection.position.norm() <= c.range_m) return truth_label;
      return std::nullopt;
  }
  return std::nullopt;
}

std::string numbered(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
  return buf;
}

}  // namespace

DtiOutput run_dti_model(const std::vector<GroundTruthTrajectory>& truths, double duration_s,
                        double spurious_rate_hz, const DtiModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  // Separate streams keep detection draws aligned across models that differ
  // only in tracker or clutter settings.
  Rng detect_rng(derive_seed(seed, 1));
  Rng clutter_rng(derive_seed(seed, 2));
  Rng drop_rng(derive_seed(seed, 3));

  DtiOutput out;
  std::vector<TrackerTrack> active;
  std::vector<TrackerTrack> done;
  std::size_t next_track = 1;
  const auto n_window = static_cast<std::size_t>(cfg.track_n);

  const long scans = static_cast<long>(std::floor(duration_s / cfg.scan_period_s + 1e-9));
  for (long k = 0; k <= scans; ++k) {
    const double t = static_cast<double>(k) * cfg.scan_period_s;

    std::vector<Measurement> meas;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      // Draws happen whether or not the object is visible.
      const double u = detect_rng.uniform();
      const Vec3 noise{detect_rng.normal(), detect_rng.normal(), detect_rng.normal()};
      if (!truths[i].covers(t)) continue;
      const Vec3 p = sample_at(truths[i], t).position;
      if (!cfg.fov.sees(p) || u >= cfg.p_detect) continue;
      meas.push_back({{"", t, p + noise * cfg.pos_noise_sigma_m, "sim"}, i});
    }
    const std::uint32_t n_clutter = clutter_rng.poisson(spurious_rate_hz * cfg.scan_period_s);
    for (std::uint32_t c = 0; c < n_clutter; ++c) {
      const double az = (cfg.fov.azimuth_center_deg + cfg.fov.azimuth_width_deg * (clutter_rng.uniform() - 0.5)) *
                        std::numbers::pi / 180.0;
      const double r = cfg.fov.max_range_m * std::sqrt(clutter_rng.uniform());
      const Vec3 p{r * std::sin(az), r * std::cos(az), clutter_rng.uniform(10.0, 150.0)};
      if (!cfg.fov.sees(p)) continue;
      meas.push_back({{"", t, p, "sim"}, std::nullopt});
    }
    for (Measurement& m : meas) {
      m.detection.detection_id = numbered('D', out.detections.size() + 1);
      out.detections.push_back(m.detection);
    }

    // Greedy nearest-neighbour assignment on predicted positions.
    struct Pair {
      double d;
      std::size_t track;
      std::size_t meas;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Vec3 pred = active[a].predict(t);
      for (std::size_t m = 0; m < meas.size(); ++m) {
        const double d = (meas[m].detection.position - pred).norm();
        if (d <= cfg.track_gate_m) pairs.push_back({d, a, m});
      }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
      return std::tie(x.d, x.track, x.meas) < std::tie(y.d, y.track, y.meas);
    });
    std::vector<std::optional<std::size_t>> track_meas(active.size());
    std::vector<bool> meas_used(meas.size(), false);
    for (const Pair& p : pairs) {
      if (track_meas[p.track] || meas_used[p.meas]) continue;
      track_meas[p.track] = p.meas;
      meas_used[p.meas] = true;
    }

    std::vector<TrackerTrack> next;
    std::vector<std::size_t> reseed;  // measurements that start new tracks
    for (std::size_t a = 0; a < active.size(); ++a) {
      TrackerTrack& tr = active[a];
      if (track_meas[a] && tr.confirmed && drop_rng.uniform() < cfg.track_drop_prob) {
        // Track loss: the track ends and this plot seeds a new one.
        reseed.push_back(*track_meas[a]);
        done.push_back(std::move(tr));
        continue;
      }
      if (track_meas[a]) {
        const Measurement& m = meas[*track_meas[a]];
        tr.samples.push_back({t, m.detection.position, std::nullopt, classify(cfg.classifier, m, truths), std::nullopt});
      }
      tr.hits.push_back(track_meas.at(a).has_value());
      if (!tr.confirmed) {
        const auto first = tr.hits.size() > n_window ? tr.hits.end() - n_window : tr.hits.begin();
        if (std::count(first, tr.hits.end(), true) >= cfg.track_m) {
          tr.confirmed = true;
          tr.id = numbered('T', next_track++);
        } else if (tr.hits.size() >= n_window) {
          continue;  // failed confirmation, discarded
        }
      }
      if (tr.confirmed && t - tr.samples.back().t > cfg.track_coast_s + 1e-9) {
        done.push_back(std::move(tr));
        continue;
      }
      next.push_back(std::move(tr));
    }
    for (std::size_t m = 0; m < meas.size(); ++m) {
      if (!meas_used[m]) reseed.push_back(m);
    }
    std::sort(reseed.begin(), reseed.end());
    for (std::size_t m : reseed) {
      TrackerTrack tr;
      tr.samples.push_back(
          {t, meas[m].detection.position, std::nullopt, classify(cfg.classifier, meas[m], truths), std::nullopt});
      tr.hits.push_back(true);
      if (cfg.track_m == 1) {
        tr.confirmed = true;
        tr.id = numbered('T', next_track++);
      }
      next.push_back(std::move(tr));
    }
    active = std::move(next);
  }

  for (TrackerTrack& tr : active) done.push_back(std::move(tr));
  for (TrackerTrack& tr : done) {
    if (tr.confirmed) out.tracks.push_back({tr.id, std::move(tr.samples)});
  }
  std::sort(out.tracks.begin(), out.tracks.end(),
            [](const Track& a, const Track& b) { return a.track_id < b.track_id; });
  return out;
}

ingest::TrialBundle simulate_trial(const ScenarioConfig& scenario, const DtiModelConfig& model, std::uint64_t seed) {
  const std::vector<GroundTruthTrajectory> truths = generate_truth(scenario, seed);
  const DtiOutput dti =
      run_dti_model(truths, scenario.duration_s, scenario.clutter.spurious_detection_rate_hz, model, seed);
  const geo::EnuFrame frame(scenario.sensor);

  ingest::TrialBundle b;
  b.config.trial_id = "sim-" + std::to_string(seed);
  b.config.dti_id = model.name;
  b.config.epoch = "2024-01-01T00:00:00Z";
  b.config.sensor = scenario.sensor;
  b.config.aoi = scenario.aoi;
  b.config.time_window = {0.0, scenario.duration_s};
  b.config.association = scenario.association;
  b.config.simulation = true;

  for (const GroundTruthTrajectory& gt : truths) {
    ingest::RawTruth raw{gt.object_id, gt.class_label, {}};
    for (const StateSample& s : gt.samples) raw.samples.push_back({s.t, frame.to_geodetic(s.position), s.velocity});
    b.ground_truths.push_back(std::move(raw));
  }
  for (const Detection& d : dti.detections) {
    b.detections.push_back({d.detection_id, d.time, frame.to_geodetic(d.position), d.sensor_id});
  }
  for (const Track& tr : dti.tracks) {
    ingest::RawTrack raw{tr.track_id, {}};
    for (const TrackSample& s : tr.samples) {
      raw.samples.push_back({s.t, frame.to_geodetic(s.position), s.velocity, s.ident, s.confidence});
    }
    b.tracks.push_back(std::move(raw));
  }
  return b;
}

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

namespace {

json entry_config(const json& entry, const std::filesystem::path& base_dir) {
  if (entry.contains("path")) return ingest::read_json_file(base_dir / entry.at("path").get<std::string>());
  return entry.at("config");
}

}  // namespace

SuiteConfig SuiteConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  SuiteConfig s;
  try {
    only_keys(j, "suite", {"scenarios", "models", "iterations", "seed"});
    for (const json& e : j.at("scenarios")) {
      only_keys(e, "suite.scenarios[]", {"name", "path", "config"});
      s.scenarios.push_back({e.at("name").get<std::string>(), ScenarioConfig::from_json(entry_config(e, base_dir))});
    }
    for (const json& e : j.at("models")) {
      only_keys(e, "suite.models[]", {"name", "path", "config"});
      NamedModel m{e.at("name").get<std::string>(), DtiModelConfig::from_json(entry_config(e, base_dir))};
      m.config.name = m.name;
      s.models.push_back(std::move(m));
    }
    s.iterations = j.value("iterations", s.iterations);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("suite: ") + e.what());
  }
  if (s.scenarios.empty() || s.models.empty()) throw ConfigInvalid("suite needs at least one scenario and one model");
  if (s.iterations < 1) throw ConfigInvalid("suite iterations must be >= 1");
  return s;
}

const CellSummary& SuiteReport::cell(const std::string& scenario, const std::string& model) const {
  for (const CellSummary& c : cells) {
    if (c.scenario == scenario && c.model == model) return c;
  }
  throw Error("no suite cell " + scenario + "/" + model);
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct Accumulator {
  double sum = 0.0;
  int n = 0;

  void add(const std::optional<double>& v) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  std::optional<double> mean() const { return n > 0 ? std::optional<double>(sum / n) : std::nullopt; }
};

}  // namespace

json SuiteReport::to_json() const {
  json cells_json = json::array();
  for (const CellSummary& c : cells) {
    json metrics = json::object();
    for (const auto& [name, v] : c.mean_metrics) {
      metrics[name] = {{"mean", opt(v)}, {"defined", c.defined_counts.at(name)}};
    }
    json comps = json::object();
    for (const auto& [comp, v] : c.mean_component_scores) comps[scoring::to_string(comp)] = opt(v);
    cells_json.push_back({{"scenario", c.scenario},
                          {"model", c.model},
                          {"iterations", c.iterations},
                          {"metrics", metrics},
                          {"mean_component_scores", comps},
                          {"mean_system_score", opt(c.mean_system_score)}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"tool_version", kToolVersion}, {"cells", cells_json}};
}

std::string SuiteReport::format_table() const {
  static const char* kColumns[] = {"range_ratio_far", "location_accuracy_2d", "track_completeness",
                                   "track_continuity", "f1"};
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %-8s %10s %10s %10s %10s %10s %10s\n", "scenario", "model", "rr_far",
                "loc2d_m", "complete", "contin/h", "f1", "system");
  os << buf;
  auto cell_text = [](const std::optional<double>& v) {
    char b[32];
    if (v) {
      std::snprintf(b, sizeof b, "%.4f", *v);
    } else {
      std::snprintf(b, sizeof b, "-");
    }
    return std::string(b);
  };
  for (const CellSummary& c : cells) {
    std::snprintf(buf, sizeof buf, "%-16s %-8s", c.scenario.c_str(), c.model.c_str());
    os << buf;
    for (const char* name : kColumns) {
      std::snprintf(buf, sizeof buf, " %10s", cell_text(c.mean_metrics.at(name)).c_str());
      os << buf;
    }
    std::snprintf(buf, sizeof buf, " %10s\n", cell_text(c.mean_system_score).c_str());
    os << buf;
  }
  return os.str();
}

SuiteReport run_validation_suite(const SuiteConfig& suite, const EvaluationOptions& opts, int jobs) {
  struct Result {
    std::vector<scoring::MetricInput> metrics;
    std::optional<scoring::ScoreTree> scores;
  };
  const std::size_t n_models = suite.models.size();
  const auto iters = static_cast<std::size_t>(suite.iterations);
  const std::size_t total = suite.scenarios.size() * n_models * iters;
  std::vector<Result> results(total);

  auto run_one = [&](std::size_t idx) {
    const std::size_t it = idx % iters;
    const std::size_t m = (idx / iters) % n_models;
    const std::size_t s = idx / (iters * n_models);
    const ingest::TrialBundle bundle =
        simulate_trial(suite.scenarios[s].config, suite.models[m].config, derive_seed(suite.seed, it));
    Evaluation e = evaluate_trial(bundle, opts);
    results[idx] = {std::move(e.metrics), std::move(e.scores)};
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, total);
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < total; i = next++) {
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  SuiteReport report;
  for (std::size_t s = 0; s < suite.scenarios.size(); ++s) {
    for (std::size_t m = 0; m < n_models; ++m) {
      CellSummary cell;
      cell.scenario = suite.scenarios[s].name;
      cell.model = suite.models[m].name;
      cell.iterations = suite.iterations;
      std::map<std::string, Accumulator> metric_acc;
      std::map<scoring::Component, Accumulator> comp_acc;
      Accumulator system_acc;
      for (const auto& info : scoring::metric_registry()) metric_acc[info.name];
      for (scoring::Component c : scoring::kComponents) comp_acc[c];
      for (std::size_t it = 0; it < iters; ++it) {
        const Result& r = results[(s * n_models + m) * iters + it];
        for (const auto& in : r.metrics) metric_acc[in.name].add(in.raw);
        if (r.scores) {
          system_acc.add(r.scores->system);
          for (const auto& [comp, v] : r.scores->components) comp_acc[comp].add(v);
        }
      }
      for (const auto& [name, acc] : metric_acc) {
        cell.mean_metrics[name] = acc.mean();
        cell.defined_counts[name] = acc.n;
      }
      for (const auto& [comp, acc] : comp_acc) cell.mean_component_scores[comp] = acc.mean();
      cell.mean_system_score = system_acc.mean();
      report.cells.push_back(std::move(cell));
    }
  }
  return report;
}

}  // namespace cuas::sim
