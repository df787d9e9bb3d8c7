#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cuas/metrics_tracking.hpp"
#include "harness.hpp"

using namespace cuas;
using namespace cuas::tracking;

namespace {

// One truth with the given presence; track j exists over tracks_on[j] and is
// associated with the truth over the same set. Every sample sits at an
// interval endpoint and carries the distance `dist[j]`.
struct Fixture {
  std::vector<GroundTruthTrajectory> truths;
  std::vector<Track> tracks;
  TrackAssociation assoc;
};

Fixture fixture(const Interval& presence, const std::vector<IntervalSet>& tracks_on,
                const std::vector<double>& dist = {}) {
  Fixture f;
  GroundTruthTrajectory gt;
  gt.object_id = "gt";
  gt.samples = {{presence.start, {0, 0, 0}, {}}, {presence.end, {0, 0, 0}, {}}};
  gt.aoi_presence = IntervalSet::single(presence.start, presence.end);
  f.truths.push_back(gt);
  f.assoc.truth_count = 1;
  f.assoc.track_count = tracks_on.size();
  f.assoc.intervals.assign(1, {});
  for (std::size_t j = 0; j < tracks_on.size(); ++j) {
    Track t{"t" + std::to_string(j), {}};
    std::vector<TrackAssociation::SampleLink> links;
    const double d = dist.empty() ? 0.0 : dist[j];
    for (const auto& iv : tracks_on[j].intervals()) {
      for (double time : {iv.start, iv.end}) {
        t.samples.push_back({time, {d, 0, 0}, {}, {}, {}});
        links.push_back({0, d, d});
      }
    }
    f.tracks.push_back(t);
    f.assoc.samples.push_back(links);
    f.assoc.intervals[0].push_back(tracks_on[j]);
  }
  return f;
}

// The six-track layout with t1 and t2 nested inside t0; the union spans one hour.
std::vector<IntervalSet> continuity_layout() {
  return {IntervalSet::single(0, 1800),    IntervalSet::single(200, 600),   IntervalSet::single(900, 1500),
          IntervalSet::single(1700, 2400), IntervalSet::single(2300, 3000), IntervalSet::single(2900, 3600)};
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
    if (std::abs(u.duration() - all.duration()) < 1e-9 && (all - u).empty()) best = n;
  }
  return best;
}

}  // namespace

TEST(Completeness, Examples) {
  auto f = fixture({0, 10}, {IntervalSet::single(0, 10)});
  EXPECT_DOUBLE_EQ(*track_completeness(f.truths[0], 0, f.assoc).value, 1.0);
  f = fixture({0, 10}, {IntervalSet::single(0, 5), IntervalSet::single(5, 10)});
  EXPECT_DOUBLE_EQ(*track_completeness(f.truths[0], 0, f.assoc).value, 1.0);
  f = fixture({0, 10}, {IntervalSet::single(0, 6), IntervalSet::single(4, 8)});
  EXPECT_NEAR(*track_completeness(f.truths[0], 0, f.assoc).value, 0.8, 1e-12);
}

TEST(Completeness, FullTruthDurationOption) {
  auto f = fixture({0, 10}, {IntervalSet::single(0, 10)});
  f.truths[0].samples = {{0, {}, {}}, {20, {}, {}}};
  EXPECT_DOUBLE_EQ(*track_completeness(f.truths[0], 0, f.assoc, {true}).value, 0.5);
}

TEST(MinimalSubset, ContinuityFigureLayout) {
  const auto f = fixture({0, 3600}, continuity_layout());
  const auto m = minimal_association_subset(0, f.assoc, f.tracks);
  EXPECT_EQ(m.tracks, (std::vector<std::size_t>{0, 3, 4, 5}));
  EXPECT_TRUE(m.exact);
  EXPECT_DOUBLE_EQ(*track_continuity(0, f.assoc, f.tracks).value, 3.0);
  // Longest single association: t0 for half an hour.
  EXPECT_DOUBLE_EQ(*longest_track_segment(f.truths[0], 0, f.assoc).value, 0.5);
}

TEST(MinimalSubset, SingleTrackAndNone) {
  auto f = fixture({0, 100}, {IntervalSet::single(10, 90)});
  EXPECT_EQ(minimal_association_subset(0, f.assoc, f.tracks).tracks, (std::vector<std::size_t>{0}));
  EXPECT_DOUBLE_EQ(*track_continuity(0, f.assoc, f.tracks).value, 0.0);
  f = fixture({0, 100}, {IntervalSet{}});
  EXPECT_THROW(minimal_association_subset(0, f.assoc, f.tracks), NoAssociations);
  EXPECT_FALSE(track_continuity(0, f.assoc, f.tracks).value.has_value());
}

TEST(Continuity, TwoTracksOverHalfAnHour) {
  const auto f = fixture({0, 1800}, {IntervalSet::single(0, 900), IntervalSet::single(900, 1800)});
  EXPECT_DOUBLE_EQ(*track_continuity(0, f.assoc, f.tracks).value, 2.0);
}

TEST(MinimalSubset, GreedyMatchesExhaustiveOnSingleIntervals) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 200; ++n) {
    const int count = 1 + static_cast<int>(rng() % 8);
    std::vector<IntervalSet> sets;
    for (int j = 0; j < count; ++j) {
      const long a = static_cast<long>(rng() % 1000), len = 1 + static_cast<long>(rng() % 300);
      sets.push_back(IntervalSet::single(a / 10.0, (a + len) / 10.0));
    }
    const auto f = fixture({0, 200}, sets);
    const auto m = minimal_association_subset(0, f.assoc, f.tracks);
    EXPECT_TRUE(m.exact);
    EXPECT_EQ(m.tracks.size(), exhaustive_min_cover(sets)) << "instance " << n;
  }
}

TEST(MinimalSubset, MultiIntervalRowsUseExhaustiveSearch) {
  std::mt19937_64 rng(12);
  for (int n = 0; n < 100; ++n) {
    const int count = 1 + static_cast<int>(rng() % 8);
    std::vector<IntervalSet> sets;
    for (int j = 0; j < count; ++j) sets.emplace_back(oracle::random_intervals(rng, 3, 100000));
    if (std::all_of(sets.begin(), sets.end(), [](const IntervalSet& s) { return s.empty(); })) continue;
    const auto f = fixture({0, 100}, sets);
    const auto m = minimal_association_subset(0, f.assoc, f.tracks);
    EXPECT_EQ(m.tracks.size(), exhaustive_min_cover(sets)) << "instance " << n;
  }
}

TEST(Ambiguity, Examples) {
  auto f = fixture({0, 10}, {IntervalSet::single(0, 10)});
  EXPECT_DOUBLE_EQ(*track_ambiguity(0, f.assoc).value, 1.0);
  f = fixture({0, 10}, {IntervalSet::single(0, 10), IntervalSet::single(0, 10)});
  EXPECT_DOUBLE_EQ(*track_ambiguity(0, f.assoc).value, 2.0);
  f = fixture({0, 10}, {IntervalSet::single(0, 10), IntervalSet::single(5, 10)});
  EXPECT_DOUBLE_EQ(*track_ambiguity(0, f.assoc).value, 1.5);
  f = fixture({0, 10}, {IntervalSet{}});
  EXPECT_FALSE(track_ambiguity(0, f.assoc).value.has_value());
}

TEST(Spuriousness, Examples) {
  // Track 0 associated for the whole window, track 1 never associated and
  // present for the first half.
  auto f = fixture({0, 10}, {IntervalSet::single(0, 10), IntervalSet{}});
  f.tracks[1].samples = {{0, {}, {}, {}, {}}, {5, {}, {}, {}, {}}};
  f.assoc.samples[1] = {{}, {}};
  EXPECT_DOUBLE_EQ(*track_spuriousness(f.tracks, f.assoc, {0, 10}).value, 0.25);

  const auto all = fixture({0, 10}, {IntervalSet::single(0, 10)});
  EXPECT_DOUBLE_EQ(*track_spuriousness(all.tracks, all.assoc, {0, 10}).value, 0.0);

  auto none = fixture({0, 10}, {IntervalSet{}});
  none.tracks[0].samples = {{2, {}, {}, {}, {}}, {4, {}, {}, {}, {}}};
  none.assoc.samples[0] = {{}, {}};
  EXPECT_DOUBLE_EQ(*track_spuriousness(none.tracks, none.assoc, {0, 10}).value, 1.0);

  const auto empty = fixture({0, 10}, {});
  EXPECT_FALSE(track_spuriousness(empty.tracks, empty.assoc, {0, 10}).value.has_value());
}

TEST(PositionalAccuracy, Examples) {
  auto f = fixture({0, 40}, {IntervalSet::single(0, 40)}, {5});
  EXPECT_DOUBLE_EQ(*track_positional_accuracy(0, f.assoc, DistanceMode::k3D).value, 5.0);
  f = fixture({0, 40}, {IntervalSet::single(0, 20), IntervalSet::single(20, 40)}, {3, 4});
  EXPECT_NEAR(*track_positional_accuracy(0, f.assoc, DistanceMode::k3D).value, std::sqrt(12.5), 1e-12);
  f = fixture({0, 40}, {IntervalSet::single(0, 10), IntervalSet::single(10, 40)}, {2, 6});
  EXPECT_NEAR(*track_positional_accuracy(0, f.assoc, DistanceMode::k2D).value, std::sqrt(28.0), 1e-12);
  f = fixture({0, 40}, {IntervalSet{}});
  EXPECT_FALSE(track_positional_accuracy(0, f.assoc, DistanceMode::k2D).value.has_value());
}

TEST(VelocityAccuracy, ConstantError) {
  // Truth flies 1 m/s east; the track reports (1, 2, 0) throughout.
  auto f = fixture({0, 10}, {IntervalSet::single(0, 10)});
  f.truths[0].samples = {{0, {0, 0, 0}, {}}, {10, {10, 0, 0}, {}}};
  for (auto& s : f.tracks[0].samples) s.velocity = Vec3{1, 2, 0};
  const auto v = track_velocity_accuracy(f.truths[0], 0, f.tracks, f.assoc);
  EXPECT_NEAR(*v.value.value, 2.0, 1e-12);
  EXPECT_EQ(v.skipped, 0u);
  for (auto& s : f.tracks[0].samples) s.velocity = Vec3{1, 0, 0};
  EXPECT_NEAR(*track_velocity_accuracy(f.truths[0], 0, f.tracks, f.assoc).value.value, 0.0, 1e-12);
}

TEST(LongestSegment, Examples) {
  auto f = fixture({0, 10}, {IntervalSet::single(0, 10)});
  EXPECT_DOUBLE_EQ(*longest_track_segment(f.truths[0], 0, f.assoc).value, 1.0);
  f = fixture({0, 10}, {IntervalSet::single(0, 5), IntervalSet::single(5, 10)});
  EXPECT_DOUBLE_EQ(*longest_track_segment(f.truths[0], 0, f.assoc).value, 0.5);
  f = fixture({0, 10}, {IntervalSet{}});
  EXPECT_DOUBLE_EQ(*longest_track_segment(f.truths[0], 0, f.assoc).value, 0.0);
}

TEST(TrackingImmediateness, Examples) {
  auto f = fixture({10, 100}, {IntervalSet::single(13, 50)});
  EXPECT_DOUBLE_EQ(*tracking_immediateness(f.truths[0], 0, f.assoc).value, 3.0);
  f = fixture({10, 100}, {IntervalSet::single(10, 50)});
  EXPECT_DOUBLE_EQ(*tracking_immediateness(f.truths[0], 0, f.assoc).value, 0.0);
  f = fixture({10, 100}, {IntervalSet{}});
  EXPECT_FALSE(tracking_immediateness(f.truths[0], 0, f.assoc).value.has_value());
}

TEST(TrackingMetrics, MergingPartitionedTrackKeepsCompletenessAndLowersContinuity) {
  std::mt19937_64 rng(21);
  for (int n = 0; n < 100; ++n) {
    std::vector<IntervalSet> sets;
    for (int j = 0; j < 4; ++j) {
      const long a = static_cast<long>(rng() % 1000), len = 1 + static_cast<long>(rng() % 300);
      sets.push_back(IntervalSet::single(a / 10.0, (a + len) / 10.0));
    }
    // Split track 0 into two adjacent tracks.
    const auto& iv = sets[0].intervals().front();
    const double mid = (iv.start + iv.end) / 2;
    std::vector<IntervalSet> split = sets;
    split[0] = IntervalSet::single(iv.start, mid);
    split.push_back(IntervalSet::single(mid, iv.end));
    const auto merged = fixture({0, 200}, sets);
    const auto parted = fixture({0, 200}, split);
    EXPECT_NEAR(*track_completeness(merged.truths[0], 0, merged.assoc).value,
                *track_completeness(parted.truths[0], 0, parted.assoc).value, 1e-12);
    EXPECT_LE(*track_continuity(0, merged.assoc, merged.tracks).value,
              *track_continuity(0, parted.assoc, parted.tracks).value + 1e-12);
  }
}

TEST(TrackingMetrics, InvariantsOnRandomTrials) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto r = harness::run_library(oracle::random_trial(seed));
    for (const auto& m : r.tracking.per_truth) {
      if (m.completeness.value && m.longest_segment.value) {
        EXPECT_GE(*m.completeness.value + 1e-12, *m.longest_segment.value);
      }
      if (m.ambiguity.value) EXPECT_GE(*m.ambiguity.value, 1.0 - 1e-12);
      if (m.continuity_per_hour.value) {
        EXPECT_EQ(*m.continuity_per_hour.value == 0.0, m.minimal_subset.size() == 1);
      }
    }
    if (r.tracking.spuriousness.value) {
      EXPECT_GE(*r.tracking.spuriousness.value, 0.0);
      EXPECT_LE(*r.tracking.spuriousness.value, 1.0);
    }
  }
}
