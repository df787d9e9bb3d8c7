#pragma once

// Metric normalization against a scoring context, weighted aggregation into
// component and system scores, and the per-DTI rating history.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cuas/core.hpp"

namespace cuas::scoring {

class MissingContext : public Error {
 public:
  using Error::Error;
};

class NegativeWeight : public Error {
 public:
  using Error::Error;
};

class AllZeroWeights : public Error {
 public:
  using Error::Error;
};

class StoreCorrupt : public Error {
 public:
  using Error::Error;
};

enum class Component { kDetection, kTracking, kIdentification };

inline constexpr Component kComponents[] = {Component::kDetection, Component::kTracking, Component::kIdentification};

std::string to_string(Component c);
Component component_from_string(const std::string& s);

/// Every metric the evaluator emits, with the component it belongs to.
struct MetricInfo {
  std::string name;
  Component component;
};
std::span<const MetricInfo> metric_registry();
const MetricInfo& metric_info(const std::string& name);

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

enum class Orientation { kHigherBetter, kLowerBetter };

struct ContextEntry {
  Orientation orientation = Orientation::kHigherBetter;
  double worst = 0.0;
  double best = 1.0;
  bool clamp = true;
};

class ScoringContext {
 public:
  ScoringContext() = default;

  // Throws ConfigInvalid when worst == best or the anchors contradict the
  // orientation.
  void set(const std::string& metric, const ContextEntry& entry);
  // Throws MissingContext.
  const ContextEntry& at(const std::string& metric) const;
  bool has(const std::string& metric) const { return entries_.contains(metric); }
  const std::map<std::string, ContextEntry>& entries() const { return entries_; }

  /// Shipped defaults for every registered metric; meant to be overridden
  /// by end-user context files.
  static ScoringContext defaults();
  static ScoringContext from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::map<std::string, ContextEntry> entries_;
};

/// Linear map of `raw` from [worst, best] onto [0, 1] (1 is best).
double normalize_metric(double raw, const ContextEntry& ctx);
double normalize_metric(const std::string& metric, double raw, const ScoringContext& ctx);

// ---------------------------------------------------------------------------
// Weights and aggregation
// ---------------------------------------------------------------------------

struct WeightConfig {
  std::map<Component, std::map<std::string, double>> metric_weights;
  std::map<Component, double> component_weights;

  // Throws NegativeWeight or AllZeroWeights.
  void validate() const;
  /// Same structure with every level scaled to sum to one.
  WeightConfig normalized() const;

  /// Weight 1 for every registered metric and component.
  static WeightConfig defaults();
  static WeightConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double metric_weight(const std::string& metric) const;
  double component_weight(Component c) const;
};

struct MetricInput {
  std::string name;
  std::optional<double> raw;
  std::string reason;  // why raw is absent
};

struct AggregateOptions {
  bool treat_missing_as_zero = false;
};

struct ScoreTree {
  struct MetricScore {
    std::string name;
    Component component;
    std::optional<double> raw;
    std::optional<double> score;
    double weight = 0.0;
    std::string note;
  };

  std::vector<MetricScore> metrics;
  std::map<Component, std::optional<double>> components;
  std::optional<double> system;
  std::vector<std::string> annotations;

  nlohmann::json to_json() const;
};

/// Normalizes each present metric and rolls scores up the tree. Component
/// score is the weighted mean of its present metrics; system score is the
/// weighted mean of present components. Absent entries are renormalized
/// away (or scored 0 with treat_missing_as_zero) and annotated.
ScoreTree aggregate(std::span<const MetricInput> metrics, const ScoringContext& ctx, const WeightConfig& weights,
                    const AggregateOptions& opts = {});

/// Aggregation over already-normalized metric scores.
ScoreTree aggregate_scores(std::span<const MetricInput> scores, const WeightConfig& weights,
                           const AggregateOptions& opts = {});

// ---------------------------------------------------------------------------
// Ratings
// ---------------------------------------------------------------------------

struct RatingRecord {
  std::string dti_id;
  std::string trial_id;
  std::optional<double> system;
  std::map<Component, std::optional<double>> components;

  nlohmann::json to_json() const;
  static RatingRecord from_json(const nlohmann::json& j);
};

struct RatingRow {
  std::string dti_id;
  std::size_t trials = 0;
  std::optional<double> mean_system;
  std::map<Component, std::optional<double>> mean_components;
};

/// Rows ordered by mean system score (descending), then dti_id.
using RatingTable = std::vector<RatingRow>;

RatingTable rating_table(std::span<const RatingRecord> history);

/// Append-only score history. Backed by a JSON-lines file when a path is
/// given, otherwise kept in memory.
class RatingStore {
 public:
  RatingStore() = default;
  explicit RatingStore(std::filesystem::path path);

  // Throws StoreCorrupt on an unreadable line.
  std::vector<RatingRecord> history() const;
  void append(const RatingRecord& record);

 private:
  std::optional<std::filesystem::path> path_;
  std::vector<RatingRecord> memory_;
};

RatingTable update_rating(RatingStore& store, const std::string& dti_id, const std::string& trial_id,
                          const ScoreTree& tree);

std::string format_table(const RatingTable& table);

}  // namespace cuas::scoring
