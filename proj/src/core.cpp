#include "cuas/core.hpp"

#include <algorithm>

namespace cuas {

// ---------------------------------------------------------------------------
// IntervalSet
// ---------------------------------------------------------------------------

IntervalSet::IntervalSet(std::initializer_list<Interval> intervals) : intervals_(intervals) {
  canonicalize();
}

IntervalSet::IntervalSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  canonicalize();
}

void IntervalSet::canonicalize() {
  for (const Interval& iv : intervals_) {
    if (!(iv.start <= iv.end)) {
      throw Error("interval start after end");
    }
  }
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });

  std::vector<Interval> merged;
  merged.reserve(intervals_.size());
  for (const Interval& iv : intervals_) {
    if (!merged.empty() && iv.start - merged.back().end <= kMergeEpsilon) {
      merged.back().end = std::max(merged.back().end, iv.end);
    } else {
      merged.push_back(iv);
    }
  }
  std::erase_if(merged, [](const Interval& iv) { return iv.length() < kMergeEpsilon; });
  intervals_ = std::move(merged);
}

double IntervalSet::duration() const {
  double total = 0.0;
  for (const Interval& iv : intervals_) total += iv.length();
  return total;
}

bool IntervalSet::contains(TimeStamp t) const {
  // First interval whose end is >= t.
  auto it = std::lower_bound(intervals_.begin(), intervals_.end(), t,
                             [](const Interval& iv, TimeStamp v) { return iv.end < v; });
  return it != intervals_.end() && it->start <= t;
}

IntervalSet interval_union(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return IntervalSet(std::move(all));
}

IntervalSet interval_intersect(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> out;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    const double lo = std::max(ia->start, ib->start);
    const double hi = std::min(ia->end, ib->end);
    if (lo < hi) out.push_back({lo, hi});
    if (ia->end < ib->end) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return IntervalSet(std::move(out));
}

IntervalSet interval_subtract(const IntervalSet& a, const IntervalSet& b) {
  std::vector<Interval> out;
  auto ib = b.begin();
  for (const Interval& iv : a) {
    double cursor = iv.start;
    // Skip subtrahend pieces that end before this interval.
    while (ib != b.end() && ib->end <= iv.start) ++ib;
    for (auto it = ib; it != b.end() && it->start < iv.end; ++it) {
      if (it->start > cursor) out.push_back({cursor, it->start});
      cursor = std::max(cursor, it->end);
    }
    if (cursor < iv.end) out.push_back({cursor, iv.end});
  }
  return IntervalSet(std::move(out));
}

double duration(const IntervalSet& a) { return a.duration(); }

// ---------------------------------------------------------------------------
// Object classes
// ---------------------------------------------------------------------------

std::string to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::kUav:
      return "uav";
    case ObjectClass::kBird:
      return "bird";
    case ObjectClass::kOther:
      return "other";
  }
  return "other";
}

ObjectClass object_class_from_string(const std::string& s) {
  if (s == "uav") return ObjectClass::kUav;
  if (s == "bird") return ObjectClass::kBird;
  if (s == "other") return ObjectClass::kOther;
  throw ConfigInvalid("unknown object class '" + s + "'");
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

namespace {

Vec3 slope(const StateSample& a, const StateSample& b) { return (b.position - a.position) / (b.t - a.t); }

Vec3 velocity_at_sample(std::span<const StateSample> s, std::size_t k) {
  if (s[k].velocity) return *s[k].velocity;
  if (s.size() < 2) return {};
  if (k == 0) return slope(s[0], s[1]);
  if (k + 1 == s.size()) return slope(s[k - 1], s[k]);
  return slope(s[k - 1], s[k + 1]);
}

}  // namespace

Kinematics sample_at(std::span<const StateSample> samples, TimeStamp t) {
  if (samples.empty() || t < samples.front().t || t > samples.back().t) {
    throw OutOfRange("time " + std::to_string(t) + " outside trajectory span");
  }
  // First sample with time >= t.
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const StateSample& s, TimeStamp v) { return s.t < v; });
  const auto k = static_cast<std::size_t>(it - samples.begin());
  if (it->t == t) {
    return {it->position, velocity_at_sample(samples, k)};
  }
  const StateSample& lo = samples[k - 1];
  const StateSample& hi = samples[k];
  const double f = (t - lo.t) / (hi.t - lo.t);
  Kinematics out;
  out.position = lerp(lo.position, hi.position, f);
  if (lo.velocity && hi.velocity) {
    out.velocity = lerp(*lo.velocity, *hi.velocity, f);
  } else {
    out.velocity = slope(lo, hi);
  }
  return out;
}

Kinematics sample_at(const GroundTruthTrajectory& traj, TimeStamp t) {
  return sample_at(std::span<const StateSample>(traj.samples), t);
}

std::optional<Vec3> track_velocity(const Track& track, std::size_t k) {
  const auto& s = track.samples;
  if (s[k].velocity) return s[k].velocity;
  if (s.size() < 2) return std::nullopt;
  const std::size_t lo = k == 0 ? 0 : k - 1;
  const std::size_t hi = k + 1 == s.size() ? k : k + 1;
  return (s[hi].position - s[lo].position) / (s[hi].t - s[lo].t);
}

void validate(const GroundTruthTrajectory& traj) {
  if (traj.samples.size() < 2) {
    throw ConfigInvalid("ground truth '" + traj.object_id + "' needs at least 2 samples");
  }
  for (std::size_t k = 1; k < traj.samples.size(); ++k) {
    if (!(traj.samples[k].t > traj.samples[k - 1].t)) {
      throw ConfigInvalid("ground truth '" + traj.object_id + "' samples not strictly increasing");
    }
  }
}

void validate(const Track& track) {
  if (track.samples.empty()) {
    throw ConfigInvalid("track '" + track.track_id + "' has no samples");
  }
  for (std::size_t k = 1; k < track.samples.size(); ++k) {
    if (!(track.samples[k].t > track.samples[k - 1].t)) {
      throw ConfigInvalid("track '" + track.track_id + "' samples not strictly increasing");
    }
  }
}

}  // namespace cuas
