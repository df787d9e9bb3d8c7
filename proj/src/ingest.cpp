#include "cuas/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace cuas::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

ParseError::ParseError(const std::string& file, std::size_t line, const std::string& field, const std::string& what)
    : Error(file + ":" + std::to_string(line) + ": field '" + field + "': " + what),
      file_(file),
      line_(line),
      field_(field) {}

TrialPaths TrialPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "ground_truth.jsonl", dir / "detections.jsonl", dir / "tracks.jsonl", dir / "trial.json"};
}

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date.
long days_from_civil(long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

}  // namespace

double parse_iso8601(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &sec, &consumed) != 6) {
    throw ConfigInvalid("malformed ISO-8601 timestamp '" + s + "'");
  }
  const std::string zone = s.substr(static_cast<std::size_t>(consumed));
  if (zone != "Z" && zone != "+00:00") throw ConfigInvalid("timestamp '" + s + "' is not UTC");
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0) {
    throw ConfigInvalid("timestamp '" + s + "' out of range");
  }
  return static_cast<double>(days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d))) * 86400.0 +
         h * 3600.0 + mi * 60.0 + sec;
}

// ---------------------------------------------------------------------------
// Line-level field access
// ---------------------------------------------------------------------------

namespace {

struct TimeConverter {
  double epoch_unix = 0.0;
  TimeBase base = TimeBase::kRelative;

  double operator()(const json& v) const {
    if (v.is_string()) return parse_iso8601(v.get<std::string>()) - epoch_unix;
    if (!v.is_number()) throw ConfigInvalid("time must be a number or ISO-8601 string");
    const double t = v.get<double>();
    if (!std::isfinite(t)) throw ConfigInvalid("time is not finite");
    return base == TimeBase::kUnix ? t - epoch_unix : t;
  }
};

class Row {
 public:
  Row(const std::string& file, std::size_t line, const std::string& text) : file_(file), line_(line) {
    try {
      j_ = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(file_, line_, "<record>", std::string("invalid JSON: ") + e.what());
    }
    if (!j_.is_object()) throw ParseError(file_, line_, "<record>", "record is not a JSON object");
  }

  void only(std::initializer_list<const char*> allowed) const {
    for (const auto& [key, value] : j_.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        throw ParseError(file_, line_, key, "unknown field");
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  std::string str(const char* key) const {
    const json& v = get(key);
    if (!v.is_string()) throw fail(key, "expected a string");
    return v.get<std::string>();
  }

  double num(const char* key) const {
    const json& v = get(key);
    if (!v.is_number()) throw fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw fail(key, "not finite");
    return d;
  }

  std::optional<std::string> opt_str(const char* key) const {
    return has(key) ? std::optional<std::string>(str(key)) : std::nullopt;
  }
  std::optional<double> opt_num(const char* key) const {
    return has(key) ? std::optional<double>(num(key)) : std::nullopt;
  }

  std::optional<Vec3> velocity() const {
    const int present = has("vx") + has("vy") + has("vz");
    if (present == 0) return std::nullopt;
    if (present != 3) throw fail(has("vx") ? (has("vy") ? "vz" : "vy") : "vx", "velocity needs vx, vy and vz");
    return Vec3{num("vx"), num("vy"), num("vz")};
  }

  double time(const TimeConverter& conv) const {
    const json& v = get("t");
    try {
      return conv(v);
    } catch (const ConfigInvalid& e) {
      throw fail("t", e.what());
    }
  }

  geo::GeoPoint position() const {
    geo::GeoPoint p{num("lat"), num("lon"), num("alt_m")};
    if (std::abs(p.lat_deg) > 90.0) throw fail("lat", "latitude out of range");
    if (std::abs(p.lon_deg) > 180.0) throw fail("lon", "longitude out of range");
    return p;
  }

  ParseError fail(const std::string& key, const std::string& what) const { return {file_, line_, key, what}; }

 private:
  const json& get(const char* key) const {
    if (!j_.contains(key)) throw fail(key, "missing required field");
    return j_.at(key);
  }

  std::string file_;
  std::size_t line_;
  json j_;
};


template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    fn(line_no, line);
  }
}

// Groups rows by id in first-appearance order.
template <typename Group>
Group& group_for(std::vector<Group>& groups, std::map<std::string, std::size_t>& index, const std::string& id) {
  auto [it, inserted] = index.emplace(id, groups.size());
  if (inserted) groups.emplace_back();
  return groups[it->second];
}

}  // namespace

// ---------------------------------------------------------------------------
// trial.json
// ---------------------------------------------------------------------------

namespace {

geo::GeoPoint geo_point(const json& j, const char* where, bool need_alt) {
  try {
    geo::GeoPoint p{j.at("lat").get<double>(), j.at("lon").get<double>(),
                    need_alt ? j.at("alt_m").get<double>() : j.value("alt_m", 0.0)};
    if (std::abs(p.lat_deg) > 90.0 || std::abs(p.lon_deg) > 180.0) {
      throw geo::InvalidCoordinate(std::string(where) + ": coordinate out of range");
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string(where) + ": " + e.what());
  }
}

}  // namespace

geo::AoiSpec parse_aoi(const json& j) {
  geo::AoiSpec spec;
  try {
    const std::string shape = j.at("shape").get<std::string>();
    spec.alt_min_m = j.at("alt_min_m").get<double>();
    spec.alt_max_m = j.at("alt_max_m").get<double>();
    if (shape == "circle") {
      spec.shape = geo::AoiSpec::Shape::kCircle;
      spec.center = geo_point(j.at("center"), "aoi.center", false);
      spec.radius_m = j.at("radius_m").get<double>();
    } else if (shape == "polygon") {
      spec.shape = geo::AoiSpec::Shape::kPolygon;
      for (const json& v : j.at("vertices")) spec.vertices.push_back(geo_point(v, "aoi.vertices", false));
    } else {
      throw ConfigInvalid("aoi.shape must be \"circle\" or \"polygon\"");
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("aoi: ") + e.what());
  }
  return spec;
}

ordered_json aoi_to_json(const geo::AoiSpec& spec) {
  ordered_json j;
  if (spec.shape == geo::AoiSpec::Shape::kCircle) {
    j["shape"] = "circle";
    j["center"] = {{"lat", spec.center.lat_deg}, {"lon", spec.center.lon_deg}};
    j["radius_m"] = spec.radius_m;
  } else {
    j["shape"] = "polygon";
    ordered_json vs = ordered_json::array();
    for (const auto& v : spec.vertices) vs.push_back({{"lat", v.lat_deg}, {"lon", v.lon_deg}});
    j["vertices"] = vs;
  }
  j["alt_min_m"] = spec.alt_min_m;
  j["alt_max_m"] = spec.alt_max_m;
  return j;
}

geo::GeoPoint parse_geo_point(const json& j, const char* where) { return geo_point(j, where, true); }

TrialConfig parse_trial_config(const json& j) {
  if (!j.is_object()) throw ConfigInvalid("trial.json must be an object");
  static const std::set<std::string> known = {"trial_id",       "dti_id",      "epoch",
                                              "time_base",      "sensor",      "aoi",
                                              "time_window",    "association", "identification",
                                              "aoi_ignore_altitude", "use_full_truth_duration", "simulation"};
  for (const auto& [key, v] : j.items()) {
    if (!known.contains(key)) throw ConfigInvalid("trial.json: unknown field '" + key + "'");
  }
  TrialConfig cfg;
  try {
    cfg.trial_id = j.at("trial_id").get<std::string>();
    cfg.dti_id = j.at("dti_id").get<std::string>();
    cfg.epoch = j.at("epoch").get<std::string>();
    const std::string base = j.value("time_base", "relative");
    if (base == "relative") {
      cfg.time_base = TimeBase::kRelative;
    } else if (base == "unix") {
      cfg.time_base = TimeBase::kUnix;
    } else {
      throw ConfigInvalid("time_base must be \"relative\" or \"unix\"");
    }
    cfg.sensor = geo_point(j.at("sensor"), "sensor", true);
    cfg.aoi = parse_aoi(j.at("aoi"));

    const TimeConverter conv{parse_iso8601(cfg.epoch), cfg.time_base};
    const json& w = j.at("time_window");
    if (!w.is_array() || w.size() != 2) throw ConfigInvalid("time_window must be [t0, t1]");
    cfg.time_window = {conv(w[0]), conv(w[1])};

    if (j.contains("association")) {
      const json& a = j.at("association");
      cfg.association.gate_m = a.value("gate_m", cfg.association.gate_m);
      cfg.association.min_segment_s = a.value("min_segment_s", cfg.association.min_segment_s);
    }
    if (!(cfg.association.gate_m > 0.0)) throw ConfigInvalid("association.gate_m must be positive");
    if (!(cfg.association.min_segment_s >= 0.0)) throw ConfigInvalid("association.min_segment_s must be >= 0");
    if (j.contains("identification")) {
      cfg.positive_label = j.at("identification").value("positive_label", cfg.positive_label);
    }
    cfg.aoi_ignore_altitude = j.value("aoi_ignore_altitude", false);
    cfg.use_full_truth_duration = j.value("use_full_truth_duration", false);
    cfg.simulation = j.value("simulation", false);
  } catch (const json::exception& e) {
    throw ConfigInvalid(std::string("trial.json: ") + e.what());
  }
  return cfg;
}

ordered_json trial_config_to_json(const TrialConfig& cfg) {
  ordered_json j;
  j["trial_id"] = cfg.trial_id;
  j["dti_id"] = cfg.dti_id;
  j["epoch"] = cfg.epoch;
  j["time_base"] = cfg.time_base == TimeBase::kRelative ? "relative" : "unix";
  j["sensor"] = {{"lat", cfg.sensor.lat_deg}, {"lon", cfg.sensor.lon_deg}, {"alt_m", cfg.sensor.alt_m}};
  j["aoi"] = aoi_to_json(cfg.aoi);
  // Windows are stored relative to the epoch.
  j["time_window"] = {cfg.time_window.start, cfg.time_window.end};
  j["association"] = {{"gate_m", cfg.association.gate_m}, {"min_segment_s", cfg.association.min_segment_s}};
  j["identification"] = {{"positive_label", cfg.positive_label}};
  j["aoi_ignore_altitude"] = cfg.aoi_ignore_altitude;
  j["use_full_truth_duration"] = cfg.use_full_truth_duration;
  j["simulation"] = cfg.simulation;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

TrialBundle load_trial(const TrialPaths& paths, Format format) {
  if (format != Format::kJsonLines) throw ConfigInvalid("unsupported trial format");
  TrialBundle bundle;
  bundle.config = parse_trial_config(read_json_file(paths.trial));
  const TimeConverter conv{parse_iso8601(bundle.config.epoch), bundle.config.time_base};
  // Stored windows are relative from here on.
  bundle.config.time_base = TimeBase::kRelative;

  {
    const std::string file = paths.ground_truth.string();
    std::map<std::string, std::size_t> index;
    for_each_line(paths.ground_truth, [&](std::size_t line_no, const std::string& text) {
      const Row row(file, line_no, text);
      row.only({"object_id", "t", "lat", "lon", "alt_m", "class", "vx", "vy", "vz"});
      const std::string id = row.str("object_id");
      TruthSample s;
      s.t = row.time(conv);
      s.position = row.position();
      s.velocity = row.velocity();
      ObjectClass cls;
      try {
        cls = object_class_from_string(row.str("class"));
      } catch (const ConfigInvalid& e) {
        throw row.fail("class", e.what());
      }
      RawTruth& truth = group_for(bundle.ground_truths, index, id);
      if (truth.samples.empty()) {
        truth.object_id = id;
        truth.class_label = cls;
      } else {
        if (truth.class_label != cls) throw row.fail("class", "class changes within object '" + id + "'");
        if (!(s.t > truth.samples.back().t)) {
          throw NonMonotonicTime(file + ":" + std::to_string(line_no) + ": object '" + id +
                                 "' time does not increase");
        }
      }
      truth.samples.push_back(s);
    });
  }

  {
    const std::string file = paths.detections.string();
    std::set<std::string> seen;
    for_each_line(paths.detections, [&](std::size_t line_no, const std::string& text) {
      const Row row(file, line_no, text);
      row.only({"detection_id", "t", "lat", "lon", "alt_m", "sensor_id"});
      RawDetection d;
      d.detection_id = row.str("detection_id");
      d.t = row.time(conv);
      d.position = row.position();
      d.sensor_id = row.str("sensor_id");
      if (!seen.insert(d.detection_id).second) {
        throw DuplicateId(file + ":" + std::to_string(line_no) + ": duplicate detection_id '" + d.detection_id + "'");
      }
      bundle.detections.push_back(std::move(d));
    });
    std::stable_sort(bundle.detections.begin(), bundle.detections.end(),
                     [](const RawDetection& a, const RawDetection& b) { return a.t < b.t; });
  }

  {
    const std::string file = paths.tracks.string();
    std::map<std::string, std::size_t> index;
    for_each_line(paths.tracks, [&](std::size_t line_no, const std::string& text) {
      const Row row(file, line_no, text);
      row.only({"track_id", "t", "lat", "lon", "alt_m", "vx", "vy", "vz", "ident", "conf"});
      const std::string id = row.str("track_id");
      RawTrackSample s;
      s.t = row.time(conv);
      s.position = row.position();
      s.velocity = row.velocity();
      s.ident = row.opt_str("ident");
      s.confidence = row.opt_num("conf");
      if (s.confidence && (*s.confidence < 0.0 || *s.confidence > 1.0)) throw row.fail("conf", "must be in [0, 1]");
      RawTrack& track = group_for(bundle.tracks, index, id);
      if (track.samples.empty()) {
        track.track_id = id;
      } else if (!(s.t > track.samples.back().t)) {
        throw NonMonotonicTime(file + ":" + std::to_string(line_no) + ": track '" + id + "' time does not increase");
      }
      track.samples.push_back(std::move(s));
    });
  }

  for (const RawTruth& t : bundle.ground_truths) {
    if (t.samples.size() < 2) throw ConfigInvalid("ground truth '" + t.object_id + "' needs at least 2 samples");
  }
  return bundle;
}

// ---------------------------------------------------------------------------
// Writing
// ---------------------------------------------------------------------------

namespace {

void put_velocity(ordered_json& j, const std::optional<Vec3>& v) {
  if (!v) return;
  j["vx"] = v->x;
  j["vy"] = v->y;
  j["vz"] = v->z;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace

void write_trial(const TrialBundle& bundle, const TrialPaths& paths) {
  {
    auto out = open_out(paths.ground_truth);
    for (const RawTruth& truth : bundle.ground_truths) {
      for (const TruthSample& s : truth.samples) {
        ordered_json j;
        j["object_id"] = truth.object_id;
        j["t"] = s.t;
        j["lat"] = s.position.lat_deg;
        j["lon"] = s.position.lon_deg;
        j["alt_m"] = s.position.alt_m;
        j["class"] = to_string(truth.class_label);
        put_velocity(j, s.velocity);
        out << j.dump() << '\n';
      }
    }
  }
  {
    auto out = open_out(paths.detections);
    for (const RawDetection& d : bundle.detections) {
      ordered_json j;
      j["detection_id"] = d.detection_id;
      j["t"] = d.t;
      j["lat"] = d.position.lat_deg;
      j["lon"] = d.position.lon_deg;
      j["alt_m"] = d.position.alt_m;
      j["sensor_id"] = d.sensor_id;
      out << j.dump() << '\n';
    }
  }
  {
    auto out = open_out(paths.tracks);
    for (const RawTrack& track : bundle.tracks) {
      for (const RawTrackSample& s : track.samples) {
        ordered_json j;
        j["track_id"] = track.track_id;
        j["t"] = s.t;
        j["lat"] = s.position.lat_deg;
        j["lon"] = s.position.lon_deg;
        j["alt_m"] = s.position.alt_m;
        put_velocity(j, s.velocity);
        if (s.ident) j["ident"] = *s.ident;
        if (s.confidence) j["conf"] = *s.confidence;
        out << j.dump() << '\n';
      }
    }
  }
  {
    auto out = open_out(paths.trial);
    out << trial_config_to_json(bundle.config).dump(2) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Scoring configuration
// ---------------------------------------------------------------------------

scoring::WeightConfig load_weights(const std::filesystem::path& path) {
  return scoring::WeightConfig::from_json(read_json_file(path));
}

scoring::ScoringContext load_scoring_context(const std::filesystem::path& path) {
  return scoring::ScoringContext::from_json(read_json_file(path));
}

}  // namespace cuas::ingest
