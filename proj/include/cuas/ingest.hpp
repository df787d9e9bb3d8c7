#pragma once

// Trial file formats: JSON-lines ground truth, detections and tracks plus
// the trial.json descriptor. All times are converted to seconds relative to
// the trial epoch on load.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cuas/association.hpp"
#include "cuas/core.hpp"
#include "cuas/geo.hpp"
#include "cuas/scoring.hpp"

namespace cuas::ingest {

class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& field, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string file_;
  std::size_t line_;
  std::string field_;
};

class DuplicateId : public Error {
 public:
  using Error::Error;
};

class NonMonotonicTime : public Error {
 public:
  using Error::Error;
};

struct TruthSample {
  TimeStamp t = 0.0;
  geo::GeoPoint position;
  std::optional<Vec3> velocity;  // ENU m/s
};

struct RawTruth {
  std::string object_id;
  ObjectClass class_label = ObjectClass::kUav;
  std::vector<TruthSample> samples;
};

struct RawDetection {
  std::string detection_id;
  TimeStamp t = 0.0;
  geo::GeoPoint position;
  std::string sensor_id;
};

struct RawTrackSample {
  TimeStamp t = 0.0;
  geo::GeoPoint position;
  std::optional<Vec3> velocity;
  std::optional<std::string> ident;
  std::optional<double> confidence;
};

struct RawTrack {
  std::string track_id;
  std::vector<RawTrackSample> samples;
};

enum class TimeBase { kRelative, kUnix };

struct TrialConfig {
  std::string trial_id;
  std::string dti_id;
  std::string epoch = "1970-01-01T00:00:00Z";
  // How numeric "t" values are read: seconds after the epoch, or Unix time.
  TimeBase time_base = TimeBase::kRelative;
  geo::GeoPoint sensor;
  geo::AoiSpec aoi;
  Interval time_window;
  AssociationParams association;
  std::string positive_label = "uav";
  bool aoi_ignore_altitude = false;
  bool use_full_truth_duration = false;
  // Set by the simulator: ground truth includes every clutter object.
  bool simulation = false;
};

struct TrialBundle {
  TrialConfig config;
  std::vector<RawTruth> ground_truths;
  std::vector<RawDetection> detections;
  std::vector<RawTrack> tracks;
};

enum class Format { kJsonLines };

struct TrialPaths {
  std::filesystem::path ground_truth;
  std::filesystem::path detections;
  std::filesystem::path tracks;
  std::filesystem::path trial;

  static TrialPaths in_directory(const std::filesystem::path& dir);
};

/// Parses a trial. Rows of one object may interleave with other objects but
/// must be strictly increasing in time.
///
/// Throws ParseError (with line and field), DuplicateId or NonMonotonicTime.
TrialBundle load_trial(const TrialPaths& paths, Format format = Format::kJsonLines);

/// Writes the canonical form: objects in first-appearance order, their rows
/// contiguous and in time order, keys in schema order.
void write_trial(const TrialBundle& bundle, const TrialPaths& paths);

geo::AoiSpec parse_aoi(const nlohmann::json& j);
nlohmann::ordered_json aoi_to_json(const geo::AoiSpec& spec);
geo::GeoPoint parse_geo_point(const nlohmann::json& j, const char* where);

TrialConfig parse_trial_config(const nlohmann::json& j);
nlohmann::ordered_json trial_config_to_json(const TrialConfig& cfg);

/// Seconds since 1970-01-01T00:00:00Z for an ISO-8601 UTC timestamp
/// ("YYYY-MM-DDTHH:MM:SS[.frac](Z|+00:00)"). Throws ConfigInvalid.
double parse_iso8601(const std::string& s);

/// Reads a weights file. Throws NegativeWeight or AllZeroWeights.
scoring::WeightConfig load_weights(const std::filesystem::path& path);
scoring::ScoringContext load_scoring_context(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace cuas::ingest
