#pragma once

// End-to-end trial evaluation: geodetic bundle -> ENU scene -> associations
// -> metric reports -> normalized score tree -> report.json.

#include <string>
#include <vector>

#include <json.hpp>

#include "cuas/association.hpp"
#include "cuas/geo.hpp"
#include "cuas/ingest.hpp"
#include "cuas/metrics_detection.hpp"
#include "cuas/metrics_identification.hpp"
#include "cuas/metrics_tracking.hpp"
#include "cuas/scoring.hpp"

namespace cuas {

inline constexpr const char* kToolVersion = "0.3.1";
inline constexpr const char* kReportSchemaVersion = "1.0";

struct EvaluationOptions {
  scoring::ScoringContext context = scoring::ScoringContext::defaults();
  scoring::WeightConfig weights = scoring::WeightConfig::defaults();
  scoring::AggregateOptions aggregate;
  bool normalize = true;
};

struct Evaluation {
  ingest::TrialConfig config;
  geo::Scene scene;
  std::vector<std::string> warnings;
  // Truths scored by the metrics: those whose class is the positive label.
  std::vector<std::size_t> evaluated;
  DetectionAssociation detection_association;
  TrackAssociation track_association;
  detection::Report detection;
  tracking::Report tracking;
  identification::Report identification;
  // Trial-level value per registered metric: per-truth values are averaged
  // over the truths where they are defined.
  std::vector<scoring::MetricInput> metrics;
  std::optional<scoring::ScoreTree> scores;

  std::optional<double> metric(const std::string& name) const;
};

/// Converts a geodetic bundle to the ENU frame centred on the sensor.
geo::Scene to_scene(const ingest::TrialBundle& bundle);
geo::AreaOfInterest trial_aoi(const ingest::TrialConfig& config);

Evaluation evaluate_trial(const ingest::TrialBundle& bundle, const EvaluationOptions& opts = {});

nlohmann::json report_json(const Evaluation& eval, const EvaluationOptions& opts);

}  // namespace cuas
