// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Tolerances and time limits are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cuas/pipeline.hpp"
#include "cuas/scoring.hpp"
#include "cuas/simulator.hpp"
#include "harness.hpp"
#include "sim_fixtures.hpp"

using namespace cuas;
namespace fs = std::filesystem;

namespace {

constexpr double kIdentityTol = 1e-12;
constexpr double kAggregateTol = 1e-12;
constexpr double kNoiselessPosTol = 1e-6;
constexpr double kNoiselessSystemTol = 1e-9;

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

// ---------------------------------------------------------------------------

Outcome continuity_example() {
  Outcome o;
  // A stationary truth observed for one hour by six tracks sampled at 1 Hz.
  GroundTruthTrajectory gt;
  gt.object_id = "gt";
  gt.samples = {{0, {0, 0, 50}, {}}, {3600, {0, 0, 50}, {}}};
  gt.aoi_presence = IntervalSet::single(0, 3600);
  const std::vector<GroundTruthTrajectory> truths{gt};
  const std::vector<Interval> spans{{0, 1800}, {200, 600}, {900, 1500}, {1700, 2400}, {2300, 3000}, {2900, 3600}};
  std::vector<Track> tracks;
  for (std::size_t j = 0; j < spans.size(); ++j) {
    Track t{"t" + std::to_string(j), {}};
    for (double s = spans[j].start; s <= spans[j].end; s += 1.0) t.samples.push_back({s, {0, 0, 50}, {}, {}, {}});
    tracks.push_back(t);
  }
  const auto assoc = associate_tracks(truths, tracks, {50, 1});
  const auto subset = tracking::minimal_association_subset(0, assoc, tracks);
  std::vector<std::string> ids;
  for (std::size_t j : subset.tracks) ids.push_back(tracks[j].track_id);
  if (ids != std::vector<std::string>{"t0", "t3", "t4", "t5"}) o.fail("A^min differs");
  if (assoc.covered(0).duration() != 3600.0) o.fail("union duration is not one hour");
  const auto c = tracking::track_continuity(0, assoc, tracks);
  if (!c.value || *c.value != 3.0) o.fail("continuity " + (c.value ? std::to_string(*c.value) : "undefined"));
  o.detail = o.ok ? "A^min = {t0,t3,t4,t5}, continuity = 3 /h" : o.detail;
  return o;
}

Outcome interval_oracle() {
  Outcome o;
  int bad = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto f = harness::check_interval_case(seed);
    if (!f.empty()) {
      if (bad == 0) o.fail("seed " + std::to_string(seed) + ": " + f.front());
      ++bad;
    }
  }
  if (o.ok) o.detail = "1000 cases";
  else o.detail += " (" + std::to_string(bad) + " failing cases)";
  return o;
}

Outcome metric_oracle() {
  Outcome o;
  int bad = 0;
  std::size_t max_tracks = 0, max_truths = 0, max_samples = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const oracle::Trial t = oracle::random_trial(seed);
    std::size_t samples = 0;
    for (const auto& g : t.truths) samples += g.samples.size();
    for (const auto& k : t.tracks) samples += k.samples.size();
    max_tracks = std::max(max_tracks, t.tracks.size());
    max_truths = std::max(max_truths, t.truths.size());
    max_samples = std::max(max_samples, samples);
    const auto f = harness::compare(harness::run_library(t), oracle::evaluate(t));
    if (!f.empty()) {
      if (bad == 0) o.fail("seed " + std::to_string(seed) + ": " + f.front());
      ++bad;
    }
  }
  if (max_truths > 3 || max_tracks > 6 || max_samples > 500) o.fail("fixture exceeds size bounds");
  if (o.ok) o.detail = "100 trials";
  else o.detail += " (" + std::to_string(bad) + " failing trials)";
  return o;
}

std::size_t exhaustive_min_cover(const std::vector<IntervalSet>& sets) {
  IntervalSet all;
  for (const auto& s : sets) all = all | s;
  std::size_t best = sets.size();
  for (std::uint32_t mask = 1; mask < (1u << sets.size()); ++mask) {
    const auto n = static_cast<std::size_t>(__builtin_popcount(mask));
    if (n >= best) continue;
    IntervalSet u;
    for (std::size_t j = 0; j < sets.size(); ++j) {
      if (mask & (1u << j)) u = u | sets[j];
    }
    if ((all - u).empty()) best = n;
  }
  return best;
}

Outcome min_subset_optimality() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int agree = 0;
  for (int n = 0; n < 200; ++n) {
    const std::size_t count = 1 + rng() % 10;
    std::vector<IntervalSet> sets;
    TrackAssociation a;
    a.truth_count = 1;
    a.track_count = count;
    a.intervals.assign(1, {});
    std::vector<Track> tracks;
    for (std::size_t j = 0; j < count; ++j) {
      const long start = static_cast<long>(rng() % 3000), len = 1 + static_cast<long>(rng() % 800);
      const Interval iv{start / 10.0, (start + len) / 10.0};
      sets.push_back(IntervalSet::single(iv.start, iv.end));
      char id[8];
      std::snprintf(id, sizeof id, "t%02zu", j);
      tracks.push_back({id, {{iv.start, {}, {}, {}, {}}, {iv.end, {}, {}, {}, {}}}});
      a.intervals[0].push_back(sets.back());
      a.samples.push_back({{0, 0, 0}, {0, 0, 0}});
    }
    const auto greedy = tracking::minimal_association_subset(0, a, tracks);
    IntervalSet covered;
    for (std::size_t j : greedy.tracks) covered = covered | sets[j];
    const bool covers = (a.covered(0) - covered).empty();
    if (covers && greedy.tracks.size() == exhaustive_min_cover(sets)) {
      ++agree;
    } else {
      o.fail("instance " + std::to_string(n) + " disagrees");
    }
  }
  o.detail = std::to_string(agree) + "/200 instances agree" + (o.ok ? "" : "; " + o.detail);
  return o;
}

Outcome noiseless_closure() {
  Outcome o;
  const auto eval = evaluate_trial(sim::simulate_trial(fixtures::straight_lines(), fixtures::noiseless(), 11));
  if (eval.evaluated.size() != 2) o.fail("expected two evaluated drones");
  for (const auto& m : eval.tracking.per_truth) {
    if (m.completeness.value != 1.0) o.fail(m.object_id + ": completeness != 1");
    if (m.continuity_per_hour.value != 0.0) o.fail(m.object_id + ": continuity != 0");
    for (const auto* p : {&m.positional_accuracy_2d, &m.positional_accuracy_3d}) {
      if (!p->value || !(*p->value < kNoiselessPosTol)) o.fail(m.object_id + ": positional accuracy");
    }
  }
  if (eval.identification.f1.value != 1.0) o.fail("F1 != 1");
  if (eval.detection.precision.value != 1.0) o.fail("detection precision != 1");
  if (!eval.scores || !eval.scores->system || std::abs(*eval.scores->system - 1.0) > kNoiselessSystemTol) {
    o.fail("system score != 1");
  }
  if (o.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "system score %.12f", *eval.scores->system);
    o.detail = buf;
  }
  return o;
}

Outcome validation_orderings() {
  Outcome o;
  sim::SuiteConfig suite;
  suite.iterations = 20;
  suite.seed = 77;
  suite.scenarios = {{"radial", fixtures::radial_approach()}};
  auto model = [](const std::string& name, const std::function<void(sim::DtiModelConfig&)>& edit) {
    sim::DtiModelConfig m = sim::DtiModelConfig::preset("A");
    m.name = name;
    edit(m);
    return sim::NamedModel{name, m};
  };
  suite.models = {
      model("range2000", [](auto& m) { m.fov.max_range_m = 2000; }),
      model("range500", [](auto& m) { m.fov.max_range_m = 500; }),
      model("sigma1", [](auto& m) { m.pos_noise_sigma_m = 1; }),
      model("sigma10", [](auto& m) { m.pos_noise_sigma_m = 10; }),
      model("drop0", [](auto& m) { m.track_drop_prob = 0; }),
      model("drop02", [](auto& m) { m.track_drop_prob = 0.2; }),
      model("perfect", [](auto& m) { m.classifier = {sim::Classifier::Type::kPerfect, 0}; }),
      model("always", [](auto& m) { m.classifier = {sim::Classifier::Type::kAlwaysPositive, 0}; }),
  };
  const auto report = sim::run_validation_suite(suite, {}, 1);
  auto mean = [&](const std::string& m, const std::string& metric) {
    return report.cell("radial", m).mean_metrics.at(metric);
  };
  struct Check {
    const char* label;
    const char* better;
    const char* worse;
    const char* metric;
    bool higher_is_better;
  };
  const Check checks[] = {{"range_ratio_far", "range2000", "range500", "range_ratio_far", true},
                          {"location_accuracy_2d", "sigma1", "sigma10", "location_accuracy_2d", false},
                          {"continuity", "drop0", "drop02", "track_continuity", false},
                          {"f1", "perfect", "always", "f1", true}};
  std::string summary;
  for (const Check& c : checks) {
    const auto b = mean(c.better, c.metric), w = mean(c.worse, c.metric);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s %.4g vs %.4g", c.label, b ? *b : NAN, w ? *w : NAN);
    summary += (summary.empty() ? "" : "; ") + std::string(buf);
    if (!b || !w) {
      o.fail(std::string(c.label) + ": undefined mean");
      continue;
    }
    if (c.higher_is_better ? !(*b > *w) : !(*b < *w)) o.fail(std::string(c.label) + " ordering violated");
  }
  o.detail = summary + (o.ok ? "" : " -- " + o.detail);
  return o;
}

Outcome identity_relations() {
  Outcome o;
  std::size_t checked = 0;
  auto check = [&](const identification::Report& r, const std::string& where) {
    if (r.recall_pod.value && r.mar.value) {
      ++checked;
      if (std::abs(*r.recall_pod.value + *r.mar.value - 1.0) > kIdentityTol) o.fail(where + ": PoD + MAR != 1");
    }
    if (r.f1.value && r.precision.value && r.recall_pod.value) {
      const double p = *r.precision.value, q = *r.recall_pod.value;
      if (p + q > 0) {
        ++checked;
        if (std::abs(*r.f1.value - 2 * p * q / (p + q)) > kIdentityTol) o.fail(where + ": F1 != harmonic mean");
      }
    }
  };
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    check(harness::run_library(oracle::random_trial(seed)).identification, "trial " + std::to_string(seed));
  }
  for (const char* strategy : {"A", "B", "C"}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto e = evaluate_trial(
          sim::simulate_trial(fixtures::radial_approach(), sim::DtiModelConfig::preset(strategy), seed));
      check(e.identification, std::string("sim ") + strategy);
    }
  }
  if (o.ok) o.detail = std::to_string(checked) + " relations checked";
  return o;
}

Outcome aggregation_invariance() {
  Outcome o;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  double worst_shift = 0;
  auto diff = [&](const scoring::ScoreTree& a, const scoring::ScoreTree& b) -> double {
    double d = 0;
    for (scoring::Component c : scoring::kComponents) {
      const auto &x = a.components.at(c), &y = b.components.at(c);
      if (x.has_value() != y.has_value()) return INFINITY;
      if (x) d = std::max(d, std::abs(*x - *y));
    }
    if (a.system.has_value() != b.system.has_value()) return INFINITY;
    if (a.system) d = std::max(d, std::abs(*a.system - *b.system));
    return d;
  };
  for (int n = 0; n < 500; ++n) {
    std::vector<scoring::MetricInput> in;
    scoring::WeightConfig w;
    for (scoring::Component c : scoring::kComponents) w.component_weights[c] = u(rng) < 0.15 ? 0.0 : u(rng);
    w.component_weights[scoring::Component::kTracking] += 0.05;
    for (const auto& m : scoring::metric_registry()) {
      w.metric_weights[m.component][m.name] = u(rng) < 0.2 ? 0.0 : 10 * u(rng);
      in.push_back({m.name, u(rng) < 0.85 ? std::optional<double>(u(rng)) : std::nullopt, "undefined"});
    }
    for (auto& [c, level] : w.metric_weights) level.begin()->second += 0.05;
    const auto base = scoring::aggregate_scores(in, w);

    auto wc = w;
    for (auto& [c, v] : wc.component_weights) v *= 7;
    worst_shift = std::max(worst_shift, diff(base, scoring::aggregate_scores(in, wc)));
    for (scoring::Component comp : scoring::kComponents) {
      auto wm = w;
      for (auto& [name, v] : wm.metric_weights[comp]) v *= 7;
      worst_shift = std::max(worst_shift, diff(base, scoring::aggregate_scores(in, wm)));
    }

    for (std::size_t k = 0; k < in.size(); ++k) {
      if (!in[k].raw) continue;
      auto raised = in;
      raised[k].raw = *raised[k].raw + (1 - *raised[k].raw) * u(rng);
      const auto up = scoring::aggregate_scores(raised, w);
      for (scoring::Component c : scoring::kComponents) {
        if (base.components.at(c) && *up.components.at(c) < *base.components.at(c) - kAggregateTol) {
          o.fail("tree " + std::to_string(n) + ": component lowered");
        }
      }
      if (base.system && *up.system < *base.system - kAggregateTol) o.fail("tree " + std::to_string(n) + ": system lowered");
    }
  }
  if (worst_shift > kAggregateTol) o.fail("weight scaling moved a score by " + std::to_string(worst_shift));
  if (o.ok) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "500 trees, largest shift under x7 scaling %.2e", worst_shift);
    o.detail = buf;
  }
  return o;
}

Outcome determinism() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "cuas_acceptance_determinism";
  fs::remove_all(root);
  const std::string scenario = std::string(CUAS_SOURCE_DIR) + "/configs/scenario.json";
  const std::string model = std::string(CUAS_SOURCE_DIR) + "/configs/dti_model.json";
  for (const char* run : {"run1", "run2"}) {
    const std::string cmd = std::string("\"") + CUAS_EVAL_PATH + "\" simulate --scenario \"" + scenario +
                            "\" --model \"" + model + "\" --seed 1234 --out \"" + (root / run).string() +
                            "\" 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) {
      o.fail(std::string("simulate failed on ") + run);
      return o;
    }
  }
  std::size_t bytes = 0;
  for (const char* f : {"trial.json", "ground_truth.jsonl", "detections.jsonl", "tracks.jsonl"}) {
    const std::string a = fixtures::slurp(root / "run1" / f), b = fixtures::slurp(root / "run2" / f);
    if (a.empty()) o.fail(std::string(f) + " is empty");
    if (a != b) o.fail(std::string(f) + " differs");
    bytes += a.size();
  }
  fs::remove_all(root);
  if (o.ok) o.detail = "4 files, " + std::to_string(bytes) + " bytes identical";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  Outcome (*run)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "continuity example", 1.0, continuity_example},
      {2, "interval algebra vs 1 ms raster", 10.0, interval_oracle},
      {3, "metrics vs naive oracle", 60.0, metric_oracle},
      {4, "A^min optimality", 30.0, min_subset_optimality},
      {5, "noiseless-limit closure", 30.0, noiseless_closure},
      {6, "validation orderings", 300.0, validation_orderings},
      {7, "identity relations", 60.0, identity_relations},
      {8, "aggregation invariance", 60.0, aggregation_invariance},
      {9, "simulate determinism", 60.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "took %.2f s, limit %.0f s", secs, c.limit_s);
      o.fail(buf);
    }
    std::printf("%s %d %s: %s (%.2f s)\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.ok;
  }
  return failures == 0 ? 0 : 1;
}
