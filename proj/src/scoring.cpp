#include "cuas/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cuas::scoring {

using nlohmann::json;

std::string to_string(Component c) {
  switch (c) {
    case Component::kDetection:
      return "detection";
    case Component::kTracking:
      return "tracking";
    case Component::kIdentification:
      return "identification";
  }
  return "detection";
}

Component component_from_string(const std::string& s) {
  for (Component c : kComponents) {
    if (to_string(c) == s) return c;
  }
  throw ConfigInvalid("unknown component '" + s + "'");
}

std::span<const MetricInfo> metric_registry() {
  static const std::vector<MetricInfo> registry = {
      {"location_accuracy_2d", Component::kDetection},
      {"location_accuracy_3d", Component::kDetection},
      {"range_ratio_near", Component::kDetection},
      {"range_ratio_far", Component::kDetection},
      {"detection_precision", Component::kDetection},
      {"detection_immediateness", Component::kDetection},
      {"track_completeness", Component::kTracking},
      {"track_continuity", Component::kTracking},
      {"track_ambiguity", Component::kTracking},
      {"track_spuriousness", Component::kTracking},
      {"track_positional_accuracy_2d", Component::kTracking},
      {"track_positional_accuracy_3d", Component::kTracking},
      {"track_velocity_accuracy", Component::kTracking},
      {"longest_track_segment", Component::kTracking},
      {"tracking_immediateness", Component::kTracking},
      {"f1", Component::kIdentification},
      {"id_precision", Component::kIdentification},
      {"recall_pod", Component::kIdentification},
      {"mar", Component::kIdentification},
      {"far", Component::kIdentification},
  };
  return registry;
}

const MetricInfo& metric_info(const std::string& name) {
  for (const MetricInfo& m : metric_registry()) {
    if (m.name == name) return m;
  }
  throw ConfigInvalid("unknown metric '" + name + "'");
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

void ScoringContext::set(const std::string& metric, const ContextEntry& e) {
  if (!std::isfinite(e.worst) || !std::isfinite(e.best) || e.worst == e.best) {
    throw ConfigInvalid("scoring context for '" + metric + "' needs finite, distinct anchors");
  }
  const bool higher = e.best > e.worst;
  if (higher != (e.orientation == Orientation::kHigherBetter)) {
    throw ConfigInvalid("scoring context for '" + metric + "' contradicts its orientation");
  }
  entries_[metric] = e;
}

const ContextEntry& ScoringContext::at(const std::string& metric) const {
  auto it = entries_.find(metric);
  if (it == entries_.end()) throw MissingContext("no scoring context for metric '" + metric + "'");
  return it->second;
}

ScoringContext ScoringContext::defaults() {
  constexpr auto hi = Orientation::kHigherBetter;
  constexpr auto lo = Orientation::kLowerBetter;
  ScoringContext ctx;
  ctx.set("location_accuracy_2d", {lo, 100.0, 0.0});
  ctx.set("location_accuracy_3d", {lo, 100.0, 0.0});
  ctx.set("range_ratio_near", {hi, 0.0, 1.0});
  ctx.set("range_ratio_far", {hi, 0.0, 1.0});
  ctx.set("detection_precision", {hi, 0.0, 1.0});
  ctx.set("detection_immediateness", {lo, 60.0, 0.0});
  ctx.set("track_completeness", {hi, 0.0, 1.0});
  ctx.set("track_continuity", {lo, 20.0, 0.0});
  ctx.set("track_ambiguity", {lo, 3.0, 1.0});
  ctx.set("track_spuriousness", {lo, 1.0, 0.0});
  ctx.set("track_positional_accuracy_2d", {lo, 100.0, 0.0});
  ctx.set("track_positional_accuracy_3d", {lo, 100.0, 0.0});
  ctx.set("track_velocity_accuracy", {lo, 20.0, 0.0});
  ctx.set("longest_track_segment", {hi, 0.0, 1.0});
  ctx.set("tracking_immediateness", {lo, 60.0, 0.0});
  ctx.set("f1", {hi, 0.0, 1.0});
  ctx.set("id_precision", {hi, 0.0, 1.0});
  ctx.set("recall_pod", {hi, 0.0, 1.0});
  ctx.set("mar", {lo, 1.0, 0.0});
  ctx.set("far", {lo, 1.0, 0.0});
  return ctx;
}

ScoringContext ScoringContext::from_json(const json& j) {
  if (!j.is_object() || !j.contains("metrics") || !j.at("metrics").is_object()) {
    throw ConfigInvalid("scoring context requires a \"metrics\" object");
  }
  ScoringContext ctx = defaults();
  for (const auto& [name, e] : j.at("metrics").items()) {
    metric_info(name);
    ContextEntry entry;
    try {
      const std::string orient = e.at("orientation").get<std::string>();
      if (orient == "higher_better") {
        entry.orientation = Orientation::kHigherBetter;
      } else if (orient == "lower_better") {
        entry.orientation = Orientation::kLowerBetter;
      } else {
        throw ConfigInvalid("unknown orientation '" + orient + "' for metric '" + name + "'");
      }
      entry.worst = e.at("worst").get<double>();
      entry.best = e.at("best").get<double>();
      entry.clamp = e.value("clamp", true);
    } catch (const json::exception& ex) {
      throw ConfigInvalid("scoring context for '" + name + "': " + ex.what());
    }
    ctx.set(name, entry);
  }
  return ctx;
}

json ScoringContext::to_json() const {
  json metrics = json::object();
  for (const auto& [name, e] : entries_) {
    metrics[name] = {{"orientation", e.orientation == Orientation::kHigherBetter ? "higher_better" : "lower_better"},
                     {"worst", e.worst},
                     {"best", e.best},
                     {"clamp", e.clamp}};
  }
  return {{"metrics", metrics}};
}

double normalize_metric(double raw, const ContextEntry& ctx) {
  const double s = (raw - ctx.worst) / (ctx.best - ctx.worst);
  return ctx.clamp ? std::clamp(s, 0.0, 1.0) : s;
}

double normalize_metric(const std::string& metric, double raw, const ScoringContext& ctx) {
  return normalize_metric(raw, ctx.at(metric));
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

void WeightConfig::validate() const {
  double component_sum = 0.0;
  for (const auto& [c, w] : component_weights) {
    if (w < 0.0 || !std::isfinite(w)) throw NegativeWeight("component weight for " + to_string(c) + " is negative");
    component_sum += w;
  }
  if (!(component_sum > 0.0)) throw AllZeroWeights("all component weights are zero");
  for (const auto& [c, weights] : metric_weights) {
    double sum = 0.0;
    for (const auto& [name, w] : weights) {
      if (w < 0.0 || !std::isfinite(w)) throw NegativeWeight("weight for metric '" + name + "' is negative");
      sum += w;
    }
    if (!(sum > 0.0)) throw AllZeroWeights("all metric weights of " + to_string(c) + " are zero");
  }
}

WeightConfig WeightConfig::normalized() const {
  WeightConfig out = *this;
  double component_sum = 0.0;
  for (const auto& [c, w] : component_weights) component_sum += w;
  for (auto& [c, w] : out.component_weights) w /= component_sum;
  for (auto& [c, weights] : out.metric_weights) {
    double sum = 0.0;
    for (const auto& [name, w] : weights) sum += w;
    for (auto& [name, w] : weights) w /= sum;
  }
  return out;
}

WeightConfig WeightConfig::defaults() {
  WeightConfig w;
  for (Component c : kComponents) w.component_weights[c] = 1.0;
  for (const MetricInfo& m : metric_registry()) w.metric_weights[m.component][m.name] = 1.0;
  return w;
}

WeightConfig WeightConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigInvalid("weights must be a JSON object");
  WeightConfig w = defaults();
  try {
    if (j.contains("metric_weights")) {
      for (const auto& [comp, metrics] : j.at("metric_weights").items()) {
        const Component c = component_from_string(comp);
        auto& level = w.metric_weights[c];
        level.clear();
        for (const auto& [name, value] : metrics.items()) {
          if (metric_info(name).component != c) {
            throw ConfigInvalid("metric '" + name + "' does not belong to component " + comp);
          }
          level[name] = value.get<double>();
        }
      }
    }
    if (j.contains("component_weights")) {
      w.component_weights.clear();
      for (Component c : kComponents) w.component_weights[c] = 0.0;
      for (const auto& [comp, value] : j.at("component_weights").items()) {
        w.component_weights[component_from_string(comp)] = value.get<double>();
      }
    }
  } catch (const json::exception& ex) {
    throw ConfigInvalid(std::string("weights: ") + ex.what());
  }
  w.validate();
  return w;
}

json WeightConfig::to_json() const {
  json mw = json::object();
  for (const auto& [c, weights] : metric_weights) mw[to_string(c)] = weights;
  json cw = json::object();
  for (const auto& [c, v] : component_weights) cw[to_string(c)] = v;
  return {{"metric_weights", mw}, {"component_weights", cw}};
}

double WeightConfig::metric_weight(const std::string& metric) const {
  const auto c = metric_weights.find(metric_info(metric).component);
  if (c == metric_weights.end()) return 0.0;
  const auto it = c->second.find(metric);
  return it == c->second.end() ? 0.0 : it->second;
}

double WeightConfig::component_weight(Component c) const {
  const auto it = component_weights.find(c);
  return it == component_weights.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

namespace {

std::optional<double> weighted_mean(const std::vector<std::pair<double, double>>& weighted) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [w, s] : weighted) {
    num += w * s;
    den += w;
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ScoreTree aggregate_scores(std::span<const MetricInput> scores, const WeightConfig& weights,
                           const AggregateOptions& opts) {
  weights.validate();
  ScoreTree tree;
  std::map<Component, std::vector<std::pair<double, double>>> per_component;
  for (const MetricInput& in : scores) {
    ScoreTree::MetricScore m;
    m.name = in.name;
    m.component = metric_info(in.name).component;
    m.score = in.raw;
    m.weight = weights.metric_weight(in.name);
    if (!m.score) {
      m.note = in.reason.empty() ? "undefined" : in.reason;
      if (opts.treat_missing_as_zero) {
        m.score = 0.0;
        tree.annotations.push_back(in.name + ": missing, scored 0 (" + m.note + ")");
      } else {
        tree.annotations.push_back(in.name + ": missing, excluded from aggregation (" + m.note + ")");
      }
    }
    if (m.score && m.weight > 0.0) per_component[m.component].emplace_back(m.weight, *m.score);
    tree.metrics.push_back(std::move(m));
  }

  std::vector<std::pair<double, double>> system_inputs;
  for (Component c : kComponents) {
    const auto score = weighted_mean(per_component[c]);
    tree.components[c] = score;
    if (!score) {
      tree.annotations.push_back(to_string(c) + ": no weighted metric present, component omitted");
      continue;
    }
    const double w = weights.component_weight(c);
    if (w > 0.0) system_inputs.emplace_back(w, *score);
  }
  tree.system = weighted_mean(system_inputs);
  if (!tree.system) tree.annotations.push_back("system: no weighted component present");
  return tree;
}

ScoreTree aggregate(std::span<const MetricInput> metrics, const ScoringContext& ctx, const WeightConfig& weights,
                    const AggregateOptions& opts) {
  std::vector<MetricInput> scores;
  scores.reserve(metrics.size());
  for (const MetricInput& m : metrics) {
    MetricInput s{m.name, std::nullopt, m.reason};
    if (m.raw) s.raw = normalize_metric(m.name, *m.raw, ctx);
    scores.push_back(std::move(s));
  }
  ScoreTree tree = aggregate_scores(scores, weights, opts);
  for (std::size_t k = 0; k < metrics.size(); ++k) tree.metrics[k].raw = metrics[k].raw;
  return tree;
}

json ScoreTree::to_json() const {
  json jm = json::object();
  for (const MetricScore& m : metrics) {
    json e = {{"component", to_string(m.component)},
              {"raw", optional_number(m.raw)},
              {"score", optional_number(m.score)},
              {"weight", m.weight}};
    if (!m.note.empty()) e["note"] = m.note;
    jm[m.name] = e;
  }
  json jc = json::object();
  for (const auto& [c, s] : components) jc[to_string(c)] = optional_number(s);
  return {{"metrics", jm}, {"components", jc}, {"system", optional_number(system)}, {"annotations", annotations}};
}

// ---------------------------------------------------------------------------
// Ratings
// ---------------------------------------------------------------------------

json RatingRecord::to_json() const {
  json jc = json::object();
  for (const auto& [c, s] : components) jc[to_string(c)] = optional_number(s);
  return {{"dti_id", dti_id}, {"trial_id", trial_id}, {"system", optional_number(system)}, {"components", jc}};
}

RatingRecord RatingRecord::from_json(const json& j) {
  RatingRecord r;
  r.dti_id = j.at("dti_id").get<std::string>();
  r.trial_id = j.at("trial_id").get<std::string>();
  if (!j.at("system").is_null()) r.system = j.at("system").get<double>();
  for (const auto& [name, v] : j.at("components").items()) {
    r.components[component_from_string(name)] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
  }
  return r;
}

RatingTable rating_table(std::span<const RatingRecord> history) {
  struct Acc {
    std::size_t trials = 0;
    double system_sum = 0.0;
    std::size_t system_n = 0;
    std::map<Component, std::pair<double, std::size_t>> comp;
  };
  std::map<std::string, Acc> acc;
  for (const RatingRecord& r : history) {
    Acc& a = acc[r.dti_id];
    ++a.trials;
    if (r.system) {
      a.system_sum += *r.system;
      ++a.system_n;
    }
    for (const auto& [c, s] : r.components) {
      if (!s) continue;
      a.comp[c].first += *s;
      ++a.comp[c].second;
    }
  }
  RatingTable table;
  for (const auto& [id, a] : acc) {
    RatingRow row;
    row.dti_id = id;
    row.trials = a.trials;
    if (a.system_n > 0) row.mean_system = a.system_sum / static_cast<double>(a.system_n);
    for (Component c : kComponents) {
      auto it = a.comp.find(c);
      row.mean_components[c] = it == a.comp.end() || it->second.second == 0
                                   ? std::nullopt
                                   : std::optional<double>(it->second.first / static_cast<double>(it->second.second));
    }
    table.push_back(std::move(row));
  }
  std::stable_sort(table.begin(), table.end(), [](const RatingRow& a, const RatingRow& b) {
    const double sa = a.mean_system.value_or(-1.0);
    const double sb = b.mean_system.value_or(-1.0);
    if (sa != sb) return sa > sb;
    return a.dti_id < b.dti_id;
  });
  return table;
}

RatingStore::RatingStore(std::filesystem::path path) : path_(std::move(path)) {}

std::vector<RatingRecord> RatingStore::history() const {
  if (!path_) return memory_;
  std::vector<RatingRecord> out;
  std::ifstream in(*path_);
  if (!in) return out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(RatingRecord::from_json(json::parse(line)));
    } catch (const std::exception& ex) {
      throw StoreCorrupt(path_->string() + ":" + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

void RatingStore::append(const RatingRecord& record) {
  if (!path_) {
    memory_.push_back(record);
    return;
  }
  std::ofstream out(*path_, std::ios::app);
  if (!out) throw Error("cannot open rating store " + path_->string());
  out << record.to_json().dump() << '\n';
}

RatingTable update_rating(RatingStore& store, const std::string& dti_id, const std::string& trial_id,
                          const ScoreTree& tree) {
  RatingRecord rec{dti_id, trial_id, tree.system, tree.components};
  store.append(rec);
  const auto history = store.history();
  return rating_table(history);
}

std::string format_table(const RatingTable& table) {
  auto cell = [](const std::optional<double>& v) {
    std::ostringstream os;
    if (v) {
      os << std::fixed << std::setprecision(4) << *v;
    } else {
      os << "-";
    }
    return os.str();
  };
  std::ostringstream os;
  os << std::left << std::setw(6) << "rank" << std::setw(24) << "dti_id" << std::setw(8) << "trials" << std::setw(10)
     << "system" << std::setw(11) << "detection" << std::setw(10) << "tracking" << "identification\n";
  std::size_t rank = 1;
  for (const RatingRow& r : table) {
    os << std::left << std::setw(6) << rank++ << std::setw(24) << r.dti_id << std::setw(8) << r.trials
       << std::setw(10) << cell(r.mean_system) << std::setw(11) << cell(r.mean_components.at(Component::kDetection))
       << std::setw(10) << cell(r.mean_components.at(Component::kTracking))
       << cell(r.mean_components.at(Component::kIdentification)) << '\n';
  }
  return os.str();
}

}  // namespace cuas::scoring
