#include "cuas/metrics_tracking.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <limits>

namespace cuas::tracking {

namespace {

constexpr double kSecondsPerHour = 3600.0;

double truth_duration(const GroundTruthTrajectory& truth, const Options& opts) {
  return opts.use_full_truth_duration ? truth.span().length() : truth.aoi_presence.duration();
}

// Sorted, de-duplicated boundaries of every interval in `sets`.
std::vector<double> breakpoints(const std::vector<const IntervalSet*>& sets) {
  std::vector<double> pts;
  for (const IntervalSet* s : sets) {
    for (const Interval& iv : *s) {
      pts.push_back(iv.start);
      pts.push_back(iv.end);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// End of the component of `s` that contains instant p (within merge tolerance).
std::optional<double> reach_from(const IntervalSet& s, double p) {
  for (const Interval& iv : s) {
    if (iv.start <= p + IntervalSet::kMergeEpsilon && iv.end > p + IntervalSet::kMergeEpsilon) return iv.end;
  }
  return std::nullopt;
}

MinimalSubset greedy_cover(std::size_t i, const TrackAssociation& assoc, std::span<const Track> tracks,
                           const std::vector<std::size_t>& candidates) {
  const IntervalSet target = assoc.covered(i);
  IntervalSet covered;
  MinimalSubset out;
  std::vector<bool> used(candidates.size(), false);
  for (;;) {
    const IntervalSet remaining = target - covered;
    if (remaining.empty()) break;
    const double p = remaining.front().start;

    std::optional<std::size_t> best;
    double best_reach = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (used[c]) continue;
      const IntervalSet& a = assoc.interval(i, candidates[c]);
      if (!reach_from(a, p)) continue;
      const double reach = *reach_from(covered | a, p);
      bool better = reach > best_reach;
      if (!better && reach == best_reach) {
        const IntervalSet& b = assoc.interval(i, candidates[*best]);
        const double da = a.duration();
        const double db = b.duration();
        better = da > db || (da == db && tracks[candidates[c]].track_id < tracks[candidates[*best]].track_id);
      }
      if (better) {
        best = c;
        best_reach = reach;
      }
    }
    if (!best) break;
    used[*best] = true;
    covered = covered | assoc.interval(i, candidates[*best]);
    out.tracks.push_back(candidates[*best]);
  }
  return out;
}

// Smallest subset by exhaustive search; ties prefer larger total association
// time, then the lexicographically smaller list of track ids.
MinimalSubset exhaustive_cover(std::size_t i, const TrackAssociation& assoc, std::span<const Track> tracks,
                               const std::vector<std::size_t>& candidates) {
  const IntervalSet target = assoc.covered(i);
  const std::size_t n = candidates.size();
  MinimalSubset best;
  std::size_t best_size = n + 1;
  double best_total = -1.0;
  std::vector<std::string> best_ids;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size > best_size) continue;
    IntervalSet u;
    double total = 0.0;
    std::vector<std::size_t> chosen;
    std::vector<std::string> ids;
    for (std::size_t c = 0; c < n; ++c) {
      if (!(mask & (1u << c))) continue;
      const IntervalSet& a = assoc.interval(i, candidates[c]);
      u = u | a;
      total += a.duration();
      chosen.push_back(candidates[c]);
      ids.push_back(tracks[candidates[c]].track_id);
    }
    if (!(target - u).empty()) continue;
    std::sort(ids.begin(), ids.end());
    const bool better = size < best_size || total > best_total || (total == best_total && ids < best_ids);
    if (better) {
      best_size = size;
      best_total = total;
      best_ids = ids;
      best.tracks = chosen;
    }
  }
  return best;
}

}  // namespace

MetricValue track_completeness(const GroundTruthTrajectory& truth, std::size_t i, const TrackAssociation& assoc,
                               const Options& opts) {
  const double denom = truth_duration(truth, opts);
  if (!(denom > 0.0)) return MetricValue::undefined("degenerate truth: zero duration");
  return MetricValue::of(std::clamp(assoc.covered(i).duration() / denom, 0.0, 1.0));
}

MinimalSubset minimal_association_subset(std::size_t i, const TrackAssociation& assoc, std::span<const Track> tracks,
                                         const Options& opts) {
  const std::vector<std::size_t> candidates = assoc.tracks_of(i);
  if (candidates.empty()) throw NoAssociations("truth has no associated tracks");

  const bool single_intervals = std::all_of(candidates.begin(), candidates.end(),
                                            [&](std::size_t j) { return assoc.interval(i, j).size() == 1; });
  if (single_intervals) return greedy_cover(i, assoc, tracks, candidates);
  if (candidates.size() <= opts.brute_force_max_tracks) return exhaustive_cover(i, assoc, tracks, candidates);
  MinimalSubset greedy = greedy_cover(i, assoc, tracks, candidates);
  greedy.exact = false;
  return greedy;
}

MetricValue track_continuity(std::size_t i, const TrackAssociation& assoc, std::span<const Track> tracks,
                             const Options& opts) {
  if (assoc.tracks_of(i).empty()) return MetricValue::undefined("no associated tracks");
  const double hours = assoc.covered(i).duration() / kSecondsPerHour;
  if (!(hours > 0.0)) return MetricValue::undefined("zero tracked duration");
  const auto subset = minimal_association_subset(i, assoc, tracks, opts);
  return MetricValue::of(static_cast<double>(subset.tracks.size() - 1) / hours);
}

MetricValue track_ambiguity(std::size_t i, const TrackAssociation& assoc) {
  std::vector<const IntervalSet*> sets;
  for (const IntervalSet& s : assoc.intervals[i]) sets.push_back(&s);
  const std::vector<double> pts = breakpoints(sets);
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double dt = pts[k + 1] - pts[k];
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    const auto count = std::count_if(sets.begin(), sets.end(), [&](const IntervalSet* s) { return s->contains(mid); });
    if (count == 0) continue;
    weighted += static_cast<double>(count) * dt;
    total += dt;
  }
  if (!(total > 0.0)) return MetricValue::undefined("no tracks represent the truth");
  return MetricValue::of(weighted / total);
}

MetricValue track_spuriousness(std::span<const Track> tracks, const TrackAssociation& assoc, const Interval& window) {
  const IntervalSet win = IntervalSet::single(window.start, window.end);
  std::vector<IntervalSet> existence;
  std::vector<IntervalSet> associated;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    existence.push_back(tracks[j].range() & win);
    IntervalSet a;
    for (std::size_t i = 0; i < assoc.truth_count; ++i) a = a | assoc.interval(i, j);
    associated.push_back(a & win);
  }
  std::vector<const IntervalSet*> sets;
  for (const auto& s : existence) sets.push_back(&s);
  for (const auto& s : associated) sets.push_back(&s);
  const std::vector<double> pts = breakpoints(sets);

  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double dt = pts[k + 1] - pts[k];
    const double mid = 0.5 * (pts[k] + pts[k + 1]);
    int n_tracks = 0;
    int n_assoc = 0;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      if (existence[j].contains(mid)) ++n_tracks;
      if (associated[j].contains(mid)) ++n_assoc;
    }
    if (n_tracks == 0) continue;
    weighted += static_cast<double>(n_tracks - n_assoc) / n_tracks * dt;
    total += dt;
  }
  if (!(total > 0.0)) return MetricValue::undefined("no track exists in the window");
  return MetricValue::of(weighted / total);
}

MetricValue track_positional_accuracy(std::size_t i, const TrackAssociation& assoc, DistanceMode mode) {
  double weighted = 0.0;
  double weights = 0.0;
  double unweighted = 0.0;
  std::size_t n_tracks = 0;
  for (std::size_t j : assoc.tracks_with_samples(i)) {
    double sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& s : assoc.samples[j]) {
      if (s.truth != i) continue;
      const double d = mode == DistanceMode::k2D ? s.distance_2d : s.distance_3d;
      sum_sq += d * d;
      ++n;
    }
    const double acc_sq = sum_sq / static_cast<double>(n);
    const double w = assoc.interval(i, j).duration();
    weighted += w * acc_sq;
    weights += w;
    unweighted += acc_sq;
    ++n_tracks;
  }
  if (n_tracks == 0) return MetricValue::undefined("no tracks represent the truth");
  if (weights > 0.0) return MetricValue::of(std::sqrt(weighted / weights));
  return MetricValue::of(std::sqrt(unweighted / static_cast<double>(n_tracks)));
}

VelocityAccuracy track_velocity_accuracy(const GroundTruthTrajectory& truth, std::size_t i,
                                         std::span<const Track> tracks, const TrackAssociation& assoc) {
  VelocityAccuracy out;
  double sum_sq = 0.0;
  std::size_t n = 0;
  bool represented = false;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    for (std::size_t k = 0; k < tracks[j].samples.size(); ++k) {
      if (!assoc.sample_associated(i, j, k)) continue;
      represented = true;
      const auto v = track_velocity(tracks[j], k);
      if (!v) {
        ++out.skipped;
        continue;
      }
      const Vec3 err = *v - sample_at(truth, tracks[j].samples[k].t).velocity;
      sum_sq += err.dot(err);
      ++n;
    }
  }
  if (!represented) {
    out.value = MetricValue::undefined("no tracks represent the truth");
  } else if (n == 0) {
    out.value = MetricValue::undefined("no associated sample has an obtainable velocity");
  } else {
    out.value = MetricValue::of(std::sqrt(sum_sq / static_cast<double>(n)));
  }
  return out;
}

MetricValue longest_track_segment(const GroundTruthTrajectory& truth, std::size_t i, const TrackAssociation& assoc,
                                  const Options& opts) {
  const double denom = truth_duration(truth, opts);
  if (!(denom > 0.0)) return MetricValue::undefined("degenerate truth: zero duration");
  double longest = 0.0;
  for (const IntervalSet& a : assoc.intervals[i]) longest = std::max(longest, a.duration());
  return MetricValue::of(std::clamp(longest / denom, 0.0, 1.0));
}

MetricValue tracking_immediateness(const GroundTruthTrajectory& truth, std::size_t i, const TrackAssociation& assoc) {
  if (truth.aoi_presence.empty()) return MetricValue::undefined("truth never in AoI");
  const IntervalSet covered = assoc.covered(i);
  if (covered.empty()) return MetricValue::undefined("no associated tracks");
  return MetricValue::of(covered.front().start - truth.aoi_presence.front().start);
}

Report evaluate(std::span<const GroundTruthTrajectory> truths, std::span<const std::size_t> evaluated,
                std::span<const Track> tracks, const TrackAssociation& assoc, const Interval& window,
                const Options& opts) {
  Report report;
  for (std::size_t i : evaluated) {
    const GroundTruthTrajectory& gt = truths[i];
    TruthMetrics m;
    m.object_id = gt.object_id;
    m.completeness = track_completeness(gt, i, assoc, opts);
    m.continuity_per_hour = track_continuity(i, assoc, tracks, opts);
    if (!assoc.tracks_of(i).empty()) {
      const MinimalSubset subset = minimal_association_subset(i, assoc, tracks, opts);
      for (std::size_t j : subset.tracks) m.minimal_subset.push_back(tracks[j].track_id);
      m.minimal_subset_exact = subset.exact;
    }
    m.ambiguity = track_ambiguity(i, assoc);
    m.positional_accuracy_2d = track_positional_accuracy(i, assoc, DistanceMode::k2D);
    m.positional_accuracy_3d = track_positional_accuracy(i, assoc, DistanceMode::k3D);
    const VelocityAccuracy va = track_velocity_accuracy(gt, i, tracks, assoc);
    m.velocity_accuracy = va.value;
    m.velocity_samples_skipped = va.skipped;
    m.longest_segment = longest_track_segment(gt, i, assoc, opts);
    m.immediateness = tracking_immediateness(gt, i, assoc);
    report.per_truth.push_back(std::move(m));
  }
  report.spuriousness = track_spuriousness(tracks, assoc, window);
  return report;
}

}  // namespace cuas::tracking
