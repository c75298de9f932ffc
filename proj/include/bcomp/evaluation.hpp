#pragma once

#include "bcomp/scene_graph.hpp"
#include "bcomp/synthetic.hpp"

#include <span>
#include <utility>
#include <vector>

namespace bcomp {

struct RecognitionReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<std::pair<int, int>> matches;  // (landmark id, ground-truth plane id)

  /// Fills precision, recall and f1 from the counts. Ratios with an empty
  /// denominator are 0.
  static RecognitionReport from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
};

/// Harmonic mean of precision and recall; 0 when both are 0.
[[nodiscard]] double f1_score(double precision, double recall) noexcept;

struct MatchTolerance {
  double angle_tol = 10.0;  // degrees
  double offset_tol = 0.2;  // meters
};

/// Greedy one-to-one matching of same-class landmarks and truth planes by
/// angle / angle_tol + |dd| / offset_tol. Non-building truth planes are ignored.
[[nodiscard]] RecognitionReport match_to_ground_truth(std::span<const PlaneLandmark> landmarks,
                                                      std::span<const SyntheticPlane> truth,
                                                      const MatchTolerance& tolerance = {});

}  // namespace bcomp
