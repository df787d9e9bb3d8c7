#pragma once

// Scenario generation and a low-fidelity DTI model (scan-based detector,
// M-of-N nearest-neighbour tracker, rule-based classifier).
//
// All geometry is in the ENU frame centred on the sensor. Randomness comes
// from std::mt19937_64 seeded through splitmix64 with (seed, stream); the
// uniform and Gaussian transforms are implemented here so streams do not
// depend on the standard library's distribution implementations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "cuas/core.hpp"
#include "cuas/geo.hpp"
#include "cuas/ingest.hpp"
#include "cuas/pipeline.hpp"

namespace cuas::sim {

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Box-Muller; the second variate is cached.
  double normal();
  /// Knuth's multiplication method; fine for the small means used here.
  std::uint32_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class Category { kSensitiveSite, kPublicEvent, kBorder };
enum class Behavior { kNeutral, kMalicious };

struct DroneConfig {
  std::string id;
  ObjectClass class_label = ObjectClass::kUav;
  std::vector<Vec3> waypoints;  // ENU metres
  double speed_mps = 10.0;
  double start_s = 0.0;
  Behavior behavior = Behavior::kMalicious;
};

struct ClutterConfig {
  int bird_count = 0;
  double bird_speed_min = 5.0;
  double bird_speed_max = 15.0;
  double bird_area_radius_m = 1000.0;
  double spurious_detection_rate_hz = 0.0;
};

struct ScenarioConfig {
  Category category = Category::kSensitiveSite;
  geo::GeoPoint sensor;
  geo::AoiSpec aoi;
  double duration_s = 0.0;
  std::vector<DroneConfig> drones;
  ClutterConfig clutter;
  std::uint64_t rng_seed = 0;
  AssociationParams association;

  void validate() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
};

struct Fov {
  double azimuth_center_deg = 0.0;
  double azimuth_width_deg = 360.0;
  double max_range_m = 2000.0;
  // Obstructed azimuth sectors [from, to], clockwise from "from".
  std::vector<std::array<double, 2>> blind_sectors;

  bool sees(const Vec3& enu) const;
};

struct Classifier {
  enum class Type { kPerfect, kAlwaysPositive, kRangeThreshold };
  Type type = Type::kPerfect;
  double range_m = 0.0;
};

struct DtiModelConfig {
  std::string name = "A";
  Fov fov;
  double p_detect = 0.9;
  double scan_period_s = 1.0;
  double pos_noise_sigma_m = 5.0;
  int track_m = 2;
  int track_n = 3;
  double track_gate_m = 50.0;
  double track_drop_prob = 0.0;
  double track_coast_s = 3.0;
  Classifier classifier;

  void validate() const;
  /// Named presets "A", "B", "C".
  static DtiModelConfig preset(const std::string& strategy);
  /// A "strategy" key selects the preset; other keys override it.
  static DtiModelConfig from_json(const nlohmann::json& j);
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

inline constexpr double kTruthRateHz = 10.0;

/// Drone and bird trajectories in ENU, sampled at 10 Hz.
std::vector<GroundTruthTrajectory> generate_truth(const ScenarioConfig& cfg, std::uint64_t seed);

struct DtiOutput {
  std::vector<Detection> detections;
  std::vector<Track> tracks;
};

/// Scans at k * scan_period over [0, duration]. spurious_rate_hz sets the
/// Poisson rate of clutter plots spread uniformly over the field of view.
DtiOutput run_dti_model(const std::vector<GroundTruthTrajectory>& truths, double duration_s,
                        double spurious_rate_hz, const DtiModelConfig& cfg, std::uint64_t seed);

/// Truth plus model output as a geodetic trial bundle.
ingest::TrialBundle simulate_trial(const ScenarioConfig& scenario, const DtiModelConfig& model, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Validation suite
// ---------------------------------------------------------------------------

struct NamedScenario {
  std::string name;
  ScenarioConfig config;
};

struct NamedModel {
  std::string name;
  DtiModelConfig config;
};

struct SuiteConfig {
  std::vector<NamedScenario> scenarios;
  std::vector<NamedModel> models;
  int iterations = 20;
  std::uint64_t seed = 1;

  /// Scenario and model entries are inline objects or {"name","path"}
  /// references resolved against base_dir.
  static SuiteConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
};

struct CellSummary {
  std::string scenario;
  std::string model;
  int iterations = 0;
  // Mean over the iterations where the metric is defined, with that count.
  std::map<std::string, std::optional<double>> mean_metrics;
  std::map<std::string, int> defined_counts;
  std::optional<double> mean_system_score;
  std::map<scoring::Component, std::optional<double>> mean_component_scores;
};

struct SuiteReport {
  std::vector<CellSummary> cells;

  const CellSummary& cell(const std::string& scenario, const std::string& model) const;
  nlohmann::json to_json() const;
  std::string format_table() const;
};

/// Runs every (scenario, model, iteration) cell through the full pipeline.
/// Iteration k of every cell uses seed derive_seed(suite.seed, k), so models
/// are compared on common random numbers. jobs > 1 runs iterations on
/// worker threads; results do not depend on jobs.
SuiteReport run_validation_suite(const SuiteConfig& suite, const EvaluationOptions& opts = {}, int jobs = 1);

}  // namespace cuas::sim
