#include "cuas/pipeline.hpp"

#include <map>

namespace cuas {

using nlohmann::json;

std::optional<double> Evaluation::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m.raw;
  }
  throw scoring::MissingContext("unknown metric '" + name + "'");
}

geo::Scene to_scene(const ingest::TrialBundle& bundle) {
  const geo::EnuFrame frame(bundle.config.sensor);
  geo::Scene scene;
  scene.sensor.position = frame.to_enu(bundle.config.sensor);
  scene.window = bundle.config.time_window;

  for (const auto& raw : bundle.ground_truths) {
    GroundTruthTrajectory gt;
    gt.object_id = raw.object_id;
    gt.class_label = raw.class_label;
    for (const auto& s : raw.samples) gt.samples.push_back({s.t, frame.to_enu(s.position), s.velocity});
    validate(gt);
    scene.truths.push_back(std::move(gt));
  }
  for (const auto& raw : bundle.detections) {
    scene.detections.push_back({raw.detection_id, raw.t, frame.to_enu(raw.position), raw.sensor_id});
  }
  for (const auto& raw : bundle.tracks) {
    Track t;
    t.track_id = raw.track_id;
    for (const auto& s : raw.samples) {
      t.samples.push_back({s.t, frame.to_enu(s.position), s.velocity, s.ident, s.confidence});
    }
    validate(t);
    scene.tracks.push_back(std::move(t));
  }
  return scene;
}

geo::AreaOfInterest trial_aoi(const ingest::TrialConfig& config) {
  return geo::make_aoi(config.aoi, geo::EnuFrame(config.sensor), config.aoi_ignore_altitude);
}

namespace {

std::optional<double> mean_defined(const std::vector<MetricValue>& values, std::string& reason) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const MetricValue& v : values) {
    if (v.defined()) {
      sum += *v;
      ++n;
    } else if (reason.empty()) {
      reason = v.reason;
    }
  }
  if (n == 0) {
    if (values.empty()) reason = "no evaluated ground truth";
    return std::nullopt;
  }
  reason.clear();
  return sum / static_cast<double>(n);
}

template <typename PerTruth, typename Field>
scoring::MetricInput per_truth_mean(const std::string& name, const std::vector<PerTruth>& rows, Field field) {
  std::vector<MetricValue> values;
  for (const PerTruth& r : rows) values.push_back(r.*field);
  scoring::MetricInput in{name, std::nullopt, {}};
  in.raw = mean_defined(values, in.reason);
  return in;
}

scoring::MetricInput global(const std::string& name, const MetricValue& v) { return {name, v.value, v.reason}; }

std::vector<scoring::MetricInput> trial_metrics(const Evaluation& e) {
  using D = detection::TruthMetrics;
  using T = tracking::TruthMetrics;
  const auto& d = e.detection.per_truth;
  const auto& t = e.tracking.per_truth;
  return {
      per_truth_mean("location_accuracy_2d", d, &D::location_accuracy_2d),
      per_truth_mean("location_accuracy_3d", d, &D::location_accuracy_3d),
      per_truth_mean("range_ratio_near", d, &D::range_ratio_near),
      per_truth_mean("range_ratio_far", d, &D::range_ratio_far),
      global("detection_precision", e.detection.precision),
      per_truth_mean("detection_immediateness", d, &D::immediateness),
      per_truth_mean("track_completeness", t, &T::completeness),
      per_truth_mean("track_continuity", t, &T::continuity_per_hour),
      per_truth_mean("track_ambiguity", t, &T::ambiguity),
      global("track_spuriousness", e.tracking.spuriousness),
      per_truth_mean("track_positional_accuracy_2d", t, &T::positional_accuracy_2d),
      per_truth_mean("track_positional_accuracy_3d", t, &T::positional_accuracy_3d),
      per_truth_mean("track_velocity_accuracy", t, &T::velocity_accuracy),
      per_truth_mean("longest_track_segment", t, &T::longest_segment),
      per_truth_mean("tracking_immediateness", t, &T::immediateness),
      global("f1", e.identification.f1),
      global("id_precision", e.identification.precision),
      global("recall_pod", e.identification.recall_pod),
      global("mar", e.identification.mar),
      global("far", e.identification.far),
  };
}

bool is_class_label(const std::string& s) { return s == "uav" || s == "bird" || s == "other"; }

}  // namespace

Evaluation evaluate_trial(const ingest::TrialBundle& bundle, const EvaluationOptions& opts) {
  Evaluation e;
  e.config = bundle.config;
  geo::ClipResult clipped =
      geo::clip_to_window_and_aoi(to_scene(bundle), bundle.config.time_window, trial_aoi(bundle.config));
  e.scene = std::move(clipped.scene);
  e.warnings = std::move(clipped.warnings);

  const auto& truths = e.scene.truths;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!is_class_label(e.config.positive_label) || to_string(truths[i].class_label) == e.config.positive_label) {
      e.evaluated.push_back(i);
    }
  }

  e.detection_association = associate_detections(truths, e.scene.detections, e.config.association.gate_m);
  e.track_association = associate_tracks(truths, e.scene.tracks, e.config.association);

  tracking::Options topts;
  topts.use_full_truth_duration = e.config.use_full_truth_duration;
  e.detection = detection::evaluate(truths, e.evaluated, e.scene.detections, e.detection_association, e.scene.sensor);
  e.tracking = tracking::evaluate(truths, e.evaluated, e.scene.tracks, e.track_association, e.scene.window, topts);
  e.identification = identification::evaluate(truths, e.evaluated, e.scene.tracks, e.track_association,
                                              e.config.positive_label, e.config.simulation);
  for (const auto& row : e.tracking.per_truth) {
    if (!row.minimal_subset_exact) {
      e.warnings.push_back("minimal track subset for '" + row.object_id + "' found greedily; may not be minimal");
    }
  }

  e.metrics = trial_metrics(e);
  if (opts.normalize) e.scores = scoring::aggregate(e.metrics, opts.context, opts.weights, opts.aggregate);
  return e;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace {

void put(json& row, json& undefined, const char* name, const MetricValue& v) {
  row[name] = v.defined() ? json(*v) : json(nullptr);
  if (!v.defined()) undefined[name] = v.reason;
}

json detection_json(const detection::Report& r) {
  json rows = json::array();
  for (const auto& m : r.per_truth) {
    json row = {{"object_id", m.object_id}};
    json undefined = json::object();
    put(row, undefined, "location_accuracy_2d", m.location_accuracy_2d);
    put(row, undefined, "location_accuracy_3d", m.location_accuracy_3d);
    put(row, undefined, "range_ratio_near", m.range_ratio_near);
    put(row, undefined, "range_ratio_far", m.range_ratio_far);
    put(row, undefined, "detection_immediateness", m.immediateness);
    row["undefined"] = undefined;
    rows.push_back(row);
  }
  json out = {{"per_truth", rows}};
  json undefined = json::object();
  put(out, undefined, "detection_precision", r.precision);
  out["undefined"] = undefined;
  return out;
}

json tracking_json(const tracking::Report& r) {
  json rows = json::array();
  for (const auto& m : r.per_truth) {
    json row = {{"object_id", m.object_id}};
    json undefined = json::object();
    put(row, undefined, "track_completeness", m.completeness);
    put(row, undefined, "track_continuity", m.continuity_per_hour);
    put(row, undefined, "track_ambiguity", m.ambiguity);
    put(row, undefined, "track_positional_accuracy_2d", m.positional_accuracy_2d);
    put(row, undefined, "track_positional_accuracy_3d", m.positional_accuracy_3d);
    put(row, undefined, "track_velocity_accuracy", m.velocity_accuracy);
    put(row, undefined, "longest_track_segment", m.longest_segment);
    put(row, undefined, "tracking_immediateness", m.immediateness);
    row["minimal_subset"] = m.minimal_subset;
    row["minimal_subset_exact"] = m.minimal_subset_exact;
    row["velocity_samples_skipped"] = m.velocity_samples_skipped;
    row["undefined"] = undefined;
    rows.push_back(row);
  }
  json out = {{"per_truth", rows}};
  json undefined = json::object();
  put(out, undefined, "track_spuriousness", r.spuriousness);
  out["undefined"] = undefined;
  return out;
}

json identification_json(const identification::Report& r) {
  const auto& cd = r.confusion;
  json out = {{"positive_label", cd.positive_label},
              {"tp_s", cd.tp_s},
              {"fp_s", cd.fp_s},
              {"fn_s", cd.fn_s},
              {"tn_s", cd.tn_s ? json(*cd.tn_s) : json(nullptr)}};
  json undefined = json::object();
  put(out, undefined, "f1", r.f1);
  put(out, undefined, "id_precision", r.precision);
  put(out, undefined, "recall_pod", r.recall_pod);
  put(out, undefined, "mar", r.mar);
  put(out, undefined, "far", r.far);
  out["undefined"] = undefined;
  return out;
}

}  // namespace

json report_json(const Evaluation& e, const EvaluationOptions& opts) {
  json metrics = json::object();
  json annotations = json::object();
  for (const auto& m : e.metrics) {
    metrics[m.name] = m.raw ? json(*m.raw) : json(nullptr);
    if (!m.raw) annotations[m.name] = m.reason;
  }
  std::vector<std::string> evaluated_ids;
  for (std::size_t i : e.evaluated) evaluated_ids.push_back(e.scene.truths[i].object_id);

  json report = {
      {"schema_version", kReportSchemaVersion},
      {"tool_version", kToolVersion},
      {"trial_id", e.config.trial_id},
      {"dti_id", e.config.dti_id},
      {"evaluated_truths", evaluated_ids},
      {"warnings", e.warnings},
      {"config",
       {{"association", {{"gate_m", e.config.association.gate_m}, {"min_segment_s", e.config.association.min_segment_s}}},
        {"positive_label", e.config.positive_label},
        {"time_window", {e.config.time_window.start, e.config.time_window.end}},
        {"simulation", e.config.simulation},
        {"use_full_truth_duration", e.config.use_full_truth_duration},
        {"aoi_ignore_altitude", e.config.aoi_ignore_altitude},
        {"normalized", opts.normalize},
        {"treat_missing_as_zero", opts.aggregate.treat_missing_as_zero}}},
      {"raw",
       {{"detection", detection_json(e.detection)},
        {"tracking", tracking_json(e.tracking)},
        {"identification", identification_json(e.identification)}}},
      {"metrics", metrics},
      {"annotations", annotations},
  };
  if (e.scores) {
    report["config"]["scoring_context"] = opts.context.to_json();
    report["config"]["weights"] = opts.weights.to_json();
    report["scores"] = e.scores->to_json();
  }
  return report;
}

}  // namespace cuas
