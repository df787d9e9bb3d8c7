#include "cuas/metrics_identification.hpp"

#include <vector>

namespace cuas::identification {

IntervalSet identification_segments(const Track& track, const std::string& positive_label) {
  std::vector<Interval> runs;
  const auto& s = track.samples;
  std::size_t k = 0;
  while (k < s.size()) {
    if (s[k].ident != positive_label) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < s.size() && s[end + 1].ident == positive_label) ++end;
    runs.push_back({s[k].t, s[end].t});
    k = end + 1;
  }
  return IntervalSet(std::move(runs));
}

ConfusionDurations confusion_durations(std::span<const GroundTruthTrajectory> truths,
                                       std::span<const std::size_t> positives, std::span<const Track> tracks,
                                       const TrackAssociation& assoc, const std::string& positive_label,
                                       bool with_true_negatives) {
  ConfusionDurations cd;
  cd.positive_label = positive_label;

  std::vector<IntervalSet> ident;
  IntervalSet identified;
  for (const Track& t : tracks) {
    ident.push_back(identification_segments(t, positive_label));
    identified = identified | ident.back();
  }

  IntervalSet identified_associated;
  IntervalSet associated_positive;
  double presence_total = 0.0;
  for (std::size_t i : positives) {
    IntervalSet hit;
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      const IntervalSet& a = assoc.interval(i, j);
      hit = hit | (a & ident[j]);
      associated_positive = associated_positive | a;
    }
    cd.tp_s += hit.duration();
    identified_associated = identified_associated | hit;
    presence_total += truths[i].aoi_presence.duration();
  }
  cd.fp_s = (identified - identified_associated).duration();
  cd.fn_s = std::max(0.0, presence_total - cd.tp_s);

  if (with_true_negatives) {
    IntervalSet negative;
    for (std::size_t j = 0; j < tracks.size(); ++j) negative = negative | (tracks[j].range() - ident[j]);
    cd.tn_s = (negative - associated_positive).duration();
  }
  return cd;
}

namespace {

MetricValue ratio(double num, double den, const char* what) {
  if (!(den > 0.0)) return MetricValue::undefined(std::string("division undefined: ") + what + " is zero");
  return MetricValue::of(num / den);
}

}  // namespace

MetricValue f1(const ConfusionDurations& cd) {
  return ratio(2.0 * cd.tp_s, 2.0 * cd.tp_s + cd.fp_s + cd.fn_s, "2TP+FP+FN");
}

MetricValue precision(const ConfusionDurations& cd) { return ratio(cd.tp_s, cd.tp_s + cd.fp_s, "TP+FP"); }

MetricValue recall_pod(const ConfusionDurations& cd) { return ratio(cd.tp_s, cd.tp_s + cd.fn_s, "TP+FN"); }

MetricValue mar(const ConfusionDurations& cd) { return ratio(cd.fn_s, cd.tp_s + cd.fn_s, "TP+FN"); }

MetricValue far(const ConfusionDurations& cd) {
  if (!cd.tn_s) return MetricValue::undefined("true negatives unavailable outside simulation");
  return ratio(cd.fp_s, cd.fp_s + *cd.tn_s, "FP+TN");
}

Report evaluate(std::span<const GroundTruthTrajectory> truths, std::span<const std::size_t> positives,
                std::span<const Track> tracks, const TrackAssociation& assoc, const std::string& positive_label,
                bool with_true_negatives) {
  Report r;
  r.confusion = confusion_durations(truths, positives, tracks, assoc, positive_label, with_true_negatives);
  r.f1 = f1(r.confusion);
  r.precision = precision(r.confusion);
  r.recall_pod = recall_pod(r.confusion);
  r.mar = mar(r.confusion);
  r.far = far(r.confusion);
  return r;
}

}  // namespace cuas::identification
