#include "cuas/association.hpp"

#include <limits>

namespace cuas {

std::vector<std::size_t> DetectionAssociation::detections_of(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < links.size(); ++j) {
    if (links[j].truth == i) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> TrackAssociation::tracks_of(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < track_count; ++j) {
    if (!intervals[i][j].empty()) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> TrackAssociation::tracks_with_samples(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < track_count; ++j) {
    for (const SampleLink& s : samples[j]) {
      if (s.truth == i) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

IntervalSet TrackAssociation::covered(std::size_t i) const {
  std::vector<Interval> all;
  for (const IntervalSet& s : intervals[i]) all.insert(all.end(), s.begin(), s.end());
  return IntervalSet(std::move(all));
}

namespace {

struct Nearest {
  std::optional<std::size_t> truth;
  Vec3 truth_position;
};

// Nearest truth to `p` at time t among those accepted by `eligible`.
template <typename Eligible>
Nearest nearest_truth(std::span<const GroundTruthTrajectory> truths, TimeStamp t, const Vec3& p, double gate_m,
                      Eligible eligible) {
  Nearest best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!eligible(truths[i])) continue;
    const Vec3 tp = sample_at(truths[i], t).position;
    const double d = (tp - p).norm();
    if (d > gate_m) continue;
    const bool better = d < best_dist || (d == best_dist && truths[i].object_id < truths[*best.truth].object_id);
    if (better) {
      best_dist = d;
      best.truth = i;
      best.truth_position = tp;
    }
  }
  return best;
}

}  // namespace

DetectionAssociation associate_detections(std::span<const GroundTruthTrajectory> truths,
                                          std::span<const Detection> detections, double gate_m) {
  if (!(gate_m > 0.0)) throw ConfigInvalid("association gate must be positive");
  DetectionAssociation out;
  out.truth_count = truths.size();
  out.links.reserve(detections.size());
  for (const Detection& d : detections) {
    const Nearest n = nearest_truth(truths, d.time, d.position, gate_m,
                                    [&](const GroundTruthTrajectory& g) { return g.covers(d.time); });
    DetectionAssociation::Link link;
    if (n.truth) {
      link.truth = n.truth;
      link.distance_2d = distance(n.truth_position, d.position, DistanceMode::k2D);
      link.distance_3d = distance(n.truth_position, d.position, DistanceMode::k3D);
    }
    out.links.push_back(link);
  }
  return out;
}

TrackAssociation associate_tracks(std::span<const GroundTruthTrajectory> truths, std::span<const Track> tracks,
                                  const AssociationParams& params) {
  if (!(params.gate_m > 0.0)) throw ConfigInvalid("association gate must be positive");
  if (!(params.min_segment_s >= 0.0)) throw ConfigInvalid("min_segment_s must be non-negative");

  TrackAssociation out;
  out.truth_count = truths.size();
  out.track_count = tracks.size();
  out.samples.resize(tracks.size());
  std::vector<std::vector<std::vector<Interval>>> segments(truths.size(),
                                                           std::vector<std::vector<Interval>>(tracks.size()));

  for (std::size_t j = 0; j < tracks.size(); ++j) {
    const Track& track = tracks[j];
    auto& links = out.samples[j];
    links.resize(track.samples.size());
    for (std::size_t k = 0; k < track.samples.size(); ++k) {
      const TrackSample& s = track.samples[k];
      const Nearest n = nearest_truth(truths, s.t, s.position, params.gate_m,
                                      [&](const GroundTruthTrajectory& g) { return g.aoi_presence.contains(s.t); });
      if (n.truth) {
        links[k].truth = n.truth;
        links[k].distance_2d = distance(n.truth_position, s.position, DistanceMode::k2D);
        links[k].distance_3d = distance(n.truth_position, s.position, DistanceMode::k3D);
      }
    }

    // Group runs, drop short ones.
    std::size_t k = 0;
    while (k < links.size()) {
      if (!links[k].truth) {
        ++k;
        continue;
      }
      std::size_t end = k;
      while (end + 1 < links.size() && links[end + 1].truth == links[k].truth) ++end;
      const double t0 = track.samples[k].t;
      const double t1 = track.samples[end].t;
      const std::size_t i = *links[k].truth;
      if (t1 - t0 >= params.min_segment_s) {
        segments[i][j].push_back({t0, t1});
      } else {
        for (std::size_t m = k; m <= end; ++m) links[m] = {};
      }
      k = end + 1;
    }
  }

  out.intervals.resize(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) {
    out.intervals[i].reserve(tracks.size());
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      out.intervals[i].push_back(IntervalSet(std::move(segments[i][j])) & truths[i].aoi_presence);
    }
  }
  return out;
}

}  // namespace cuas
