#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cuas/scoring.hpp"

using namespace cuas;
using namespace cuas::scoring;

namespace {

WeightConfig detection_only(std::map<std::string, double> metric_w) {
  WeightConfig w;
  w.component_weights = {{Component::kDetection, 1.0}};
  w.metric_weights[Component::kDetection] = std::move(metric_w);
  return w;
}

std::filesystem::path temp_store(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("cuas_test_" + name + ".jsonl");
  std::filesystem::remove(p);
  return p;
}

ScoreTree tree_with_system(double s) {
  ScoreTree t;
  t.system = s;
  for (Component c : kComponents) t.components[c] = s;
  return t;
}

}  // namespace

TEST(Normalize, AnchorsAndLinearMap) {
  const ContextEntry lower{Orientation::kLowerBetter, 100, 0, true};
  EXPECT_DOUBLE_EQ(normalize_metric(0, lower), 1.0);
  EXPECT_DOUBLE_EQ(normalize_metric(100, lower), 0.0);
  EXPECT_DOUBLE_EQ(normalize_metric(25, lower), 0.75);
  EXPECT_DOUBLE_EQ(normalize_metric(150, lower), 0.0);
  EXPECT_DOUBLE_EQ(normalize_metric(-5, lower), 1.0);
  const ContextEntry higher{Orientation::kHigherBetter, 0, 1, true};
  EXPECT_DOUBLE_EQ(normalize_metric(0.3, higher), 0.3);
  const ContextEntry open{Orientation::kLowerBetter, 100, 0, false};
  EXPECT_DOUBLE_EQ(normalize_metric(150, open), -0.5);
}

TEST(Normalize, MonotoneInRawValue) {
  const auto ctx = ScoringContext::defaults();
  for (const auto& [name, e] : ctx.entries()) {
    // Sweep from beyond the worst anchor to beyond the best one.
    double prev = -1.0;
    for (int k = -5; k <= 25; ++k) {
      const double raw = e.worst + (e.best - e.worst) * k / 20.0;
      const double s = normalize_metric(name, raw, ctx);
      EXPECT_GE(s, prev) << name;
      prev = s;
    }
  }
}

TEST(ScoringContext, DefaultsCoverRegistryAndRejectUnknown) {
  const auto ctx = ScoringContext::defaults();
  for (const auto& m : metric_registry()) EXPECT_TRUE(ctx.has(m.name)) << m.name;
  EXPECT_DOUBLE_EQ(normalize_metric("location_accuracy_3d", 25, ctx), 0.75);
  EXPECT_THROW(normalize_metric("warp_factor", 1, ctx), MissingContext);
  ScoringContext c;
  EXPECT_THROW(c.set("f1", {Orientation::kHigherBetter, 1, 1, true}), ConfigInvalid);
}

TEST(ScoringContext, JsonRoundTrip) {
  const auto ctx = ScoringContext::defaults();
  EXPECT_EQ(ScoringContext::from_json(ctx.to_json()).to_json(), ctx.to_json());
}

TEST(Weights, NormalizedAndErrors) {
  const auto w = detection_only({{"location_accuracy_2d", 2}, {"range_ratio_far", 1}, {"detection_precision", 1}});
  const auto n = w.normalized();
  EXPECT_DOUBLE_EQ(n.metric_weight("location_accuracy_2d"), 0.5);
  EXPECT_DOUBLE_EQ(n.metric_weight("range_ratio_far"), 0.25);
  EXPECT_DOUBLE_EQ(n.metric_weight("detection_precision"), 0.25);
  const auto eq = detection_only({{"location_accuracy_2d", 1}, {"range_ratio_far", 1}, {"detection_precision", 1}});
  EXPECT_NEAR(eq.normalized().metric_weight("range_ratio_far"), 1.0 / 3, 1e-15);
  EXPECT_THROW(detection_only({{"f1", 0}, {"range_ratio_far", 0}}).validate(), AllZeroWeights);
  EXPECT_THROW(detection_only({{"range_ratio_far", -1}}).validate(), NegativeWeight);
}

TEST(Aggregate, AllOnesGiveOne) {
  std::vector<MetricInput> in;
  for (const auto& m : metric_registry()) in.push_back({m.name, 1.0, ""});
  const auto t = aggregate_scores(in, WeightConfig::defaults());
  EXPECT_DOUBLE_EQ(*t.system, 1.0);
}

TEST(Aggregate, WeightedComponentMean) {
  const std::vector<MetricInput> in{{"location_accuracy_2d", 0.8, ""}, {"range_ratio_far", 0.4, ""}};
  const auto t = aggregate_scores(in, detection_only({{"location_accuracy_2d", 2}, {"range_ratio_far", 1}}));
  EXPECT_NEAR(*t.components.at(Component::kDetection), 2.0 / 3, 1e-12);
  EXPECT_NEAR(*t.system, 2.0 / 3, 1e-12);
}

TEST(Aggregate, AbsentMetricRenormalized) {
  // Detection: 0.9 (w1), absent (w2), 0.3 (w1) -> 0.6. Tracking 0.5.
  // System with component weights 3 and 1 -> (3*0.6 + 0.5)/4 = 0.575.
  WeightConfig w;
  w.component_weights = {{Component::kDetection, 3.0}, {Component::kTracking, 1.0}};
  w.metric_weights[Component::kDetection] = {
      {"location_accuracy_2d", 1}, {"range_ratio_far", 2}, {"detection_precision", 1}};
  w.metric_weights[Component::kTracking] = {{"track_completeness", 1}};
  const std::vector<MetricInput> in{{"location_accuracy_2d", 0.9, ""},
                                    {"range_ratio_far", std::nullopt, "no associated detections"},
                                    {"detection_precision", 0.3, ""},
                                    {"track_completeness", 0.5, ""}};
  const auto t = aggregate_scores(in, w);
  EXPECT_NEAR(*t.components.at(Component::kDetection), 0.6, 1e-12);
  EXPECT_NEAR(*t.system, 0.575, 1e-12);
  EXPECT_FALSE(t.components.at(Component::kIdentification).has_value());
  EXPECT_FALSE(t.annotations.empty());
  // Scoring the gap as zero: (0.9 + 0 + 0.3)/4 = 0.3.
  const auto z = aggregate_scores(in, w, {true});
  EXPECT_NEAR(*z.components.at(Component::kDetection), 0.3, 1e-12);
}

TEST(Aggregate, RawMetricsNormalizedThroughContext) {
  const std::vector<MetricInput> in{{"location_accuracy_3d", 25.0, ""}};
  const auto t = aggregate(in, ScoringContext::defaults(), detection_only({{"location_accuracy_3d", 1}}));
  EXPECT_DOUBLE_EQ(*t.metrics[0].raw, 25.0);
  EXPECT_DOUBLE_EQ(*t.metrics[0].score, 0.75);
  EXPECT_DOUBLE_EQ(*t.system, 0.75);
}

TEST(Aggregate, ScaleInvarianceAndMonotonicity) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  const auto reg = metric_registry();
  auto close = [](const ScoreTree& a, const ScoreTree& b) {
    for (Component c : kComponents) {
      const auto &x = a.components.at(c), &y = b.components.at(c);
      if (x.has_value() != y.has_value() || (x && std::abs(*x - *y) > 1e-12)) return false;
    }
    return a.system.has_value() == b.system.has_value() && (!a.system || std::abs(*a.system - *b.system) <= 1e-12);
  };
  for (int n = 0; n < 500; ++n) {
    std::vector<MetricInput> in;
    WeightConfig w;
    for (Component c : kComponents) w.component_weights[c] = 0.1 + u(rng);
    for (const auto& m : reg) {
      w.metric_weights[m.component][m.name] = u(rng) < 0.2 ? 0.0 : u(rng);
      if (u(rng) < 0.8) in.push_back({m.name, u(rng), ""});
      else in.push_back({m.name, std::nullopt, "undefined"});
    }
    for (auto& [c, level] : w.metric_weights) level.begin()->second += 0.01;
    const auto base = aggregate_scores(in, w);

    WeightConfig wc = w;
    for (auto& [c, v] : wc.component_weights) v *= 7;
    EXPECT_TRUE(close(base, aggregate_scores(in, wc))) << "component level, tree " << n;
    WeightConfig wm = w;
    for (auto& [c, level] : wm.metric_weights) {
      for (auto& [name, v] : level) v *= 7;
    }
    EXPECT_TRUE(close(base, aggregate_scores(in, wm))) << "metric level, tree " << n;

    std::vector<std::size_t> present;
    for (std::size_t k = 0; k < in.size(); ++k) {
      if (in[k].raw) present.push_back(k);
    }
    if (present.empty()) continue;
    auto raised = in;
    auto& target = raised[present[rng() % present.size()]];
    target.raw = *target.raw + (1 - *target.raw) * u(rng);
    const auto up = aggregate_scores(raised, w);
    for (Component c : kComponents) {
      if (base.components.at(c)) EXPECT_GE(*up.components.at(c), *base.components.at(c) - 1e-12);
    }
    if (base.system) EXPECT_GE(*up.system, *base.system - 1e-12);
  }
}

TEST(Ratings, MeanAndOrdering) {
  RatingStore store;
  auto table = update_rating(store, "sys", "t1", tree_with_system(0.4));
  ASSERT_EQ(table.size(), 1u);
  table = update_rating(store, "sys", "t2", tree_with_system(0.6));
  ASSERT_EQ(table.size(), 1u);
  EXPECT_NEAR(*table[0].mean_system, 0.5, 1e-12);
  EXPECT_EQ(table[0].trials, 2u);
  update_rating(store, "alpha", "t1", tree_with_system(0.5));
  table = update_rating(store, "best", "t1", tree_with_system(0.9));
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0].dti_id, "best");
  EXPECT_EQ(table[1].dti_id, "alpha");  // tie at 0.5 broken by id
  EXPECT_EQ(table[2].dti_id, "sys");
}

TEST(Ratings, FileStorePersistsAndDetectsCorruption) {
  const auto path = temp_store("ratings");
  {
    RatingStore s(path);
    update_rating(s, "a", "t1", tree_with_system(0.7));
  }
  {
    RatingStore s(path);
    const auto table = update_rating(s, "b", "t1", tree_with_system(0.3));
    ASSERT_EQ(table.size(), 2u);
    EXPECT_EQ(table[0].dti_id, "a");
    EXPECT_EQ(s.history().size(), 2u);
  }
  std::ofstream(path, std::ios::app) << "{not json\n";
  EXPECT_THROW(RatingStore(path).history(), StoreCorrupt);
  std::filesystem::remove(path);
}

TEST(Ratings, FormatTableListsEveryRow) {
  RatingStore store;
  update_rating(store, "x", "t", tree_with_system(0.25));
  const auto table = update_rating(store, "y", "t", tree_with_system(0.75));
  const std::string text = format_table(table);
  EXPECT_LT(text.find('y'), text.find('x'));
}
