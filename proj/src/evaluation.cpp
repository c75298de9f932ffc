#include "bcomp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace bcomp {

double f1_score(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

RecognitionReport RecognitionReport::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  RecognitionReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = f1_score(r.precision, r.recall);
  return r;
}

RecognitionReport match_to_ground_truth(std::span<const PlaneLandmark> landmarks,
                                        std::span<const SyntheticPlane> truth, const MatchTolerance& tolerance) {
  std::vector<std::size_t> relevant;
  for (std::size_t t = 0; t < truth.size(); ++t)
    if (is_building_component(truth[t].cls)) relevant.push_back(t);

  struct Candidate {
    double cost;
    std::size_t l, t;
  };
  std::vector<Candidate> candidates;
  for (std::size_t l = 0; l < landmarks.size(); ++l) {
    for (std::size_t t : relevant) {
      const PlaneLandmark& lm = landmarks[l];
      const SyntheticPlane& gt = truth[t];
      if (lm.cls != gt.cls) continue;
      // Truth orientation is arbitrary; compare against the flip facing the landmark.
      const double sign = lm.normal.dot(gt.equation.normal) >= 0.0 ? 1.0 : -1.0;
      const double angle = angle_deg(lm.normal, sign * gt.equation.normal);
      const double offset = std::abs(lm.d - sign * gt.equation.d);
      if (angle > tolerance.angle_tol || offset > tolerance.offset_tol) continue;
      candidates.push_back({angle / tolerance.angle_tol + offset / tolerance.offset_tol, l, t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.cost, a.l, a.t) < std::tie(b.cost, b.l, b.t);
  });

  std::vector<bool> l_used(landmarks.size(), false);
  std::vector<bool> t_used(truth.size(), false);
  std::vector<std::pair<int, int>> matches;
  for (const Candidate& c : candidates) {
    if (l_used[c.l] || t_used[c.t]) continue;
    l_used[c.l] = t_used[c.t] = true;
    matches.emplace_back(landmarks[c.l].id, truth[c.t].id);
  }
  const std::size_t tp = matches.size();
  RecognitionReport report = RecognitionReport::from_counts(tp, landmarks.size() - tp, relevant.size() - tp);
  report.matches = std::move(matches);
  return report;
}

}  // namespace bcomp
