#pragma once

#include "bcomp/camera.hpp"
#include "bcomp/geometric_estimator.hpp"
#include "bcomp/semantic_validator.hpp"

#include <optional>
#include <span>
#include <vector>

namespace bcomp {

struct FusionConfig {
  double epsilon_match = 0.6;
  double tau_dist = 0.05;      // meters
  double theta_normal = 15.0;  // degrees
  double min_area = 0.25;      // square meters
  int min_inliers = 200;       // dangling support threshold is min_inliers / 4
  double vertical_tol = 5.0;   // degrees
  double horizontal_tol = 5.0; // degrees

  void validate() const;
};

/// A geometric plane confirmed by a semantic plane. Geometry and support
/// come from the geometric estimate, the class from the semantic one.
struct ValidatedComponent {
  Plane plane;
  SemanticClass cls = SemanticClass::Wall;
  double match_score = 0.0;
  double frame_timestamp = 0.0;
  std::vector<Point> points;  // the geometric inliers, camera frame
  std::size_t geometric_index = 0;  // position in the fused geometric list
};

/// Coverage of the semantic inliers by the geometric plane, gated on the
/// orientation-agnostic normal angle.
[[nodiscard]] double match(const Plane& geometric, const SemanticPlane& semantic, const FusionConfig& config);

/// Greedy one-to-one association in decreasing score order. Ties go to the
/// larger geometric plane, then the lower geometric index, then the lower
/// semantic index. Unmatched geometric planes are dropped.
[[nodiscard]] std::vector<ValidatedComponent> fuse_frame(const PointCloud& geometric_cloud,
                                                         std::span<const Plane> geometric,
                                                         std::span<const SemanticPlane> semantic,
                                                         const FusionConfig& config, double timestamp);

/// Dangling removal: drops components whose projected inlier extent is below
/// min_area or whose support is below min_inliers / 4.
[[nodiscard]] std::vector<ValidatedComponent> remove_dangling(std::span<const ValidatedComponent> components,
                                                              const FusionConfig& config);

/// Gravity reference for structural validation. With a pose, world_up is
/// used after rotating normals into the world; without one, camera_up is
/// used directly on camera-frame normals.
struct GravityReference {
  std::optional<Vec3> world_up;
  std::optional<Vec3> camera_up;
};

/// Grounds must be horizontal and walls vertical. Throws ConfigError when no
/// usable gravity direction is available for the given pose.
[[nodiscard]] std::vector<ValidatedComponent> structural_validate(std::span<const ValidatedComponent> components,
                                                                  const GravityReference& gravity,
                                                                  const std::optional<Pose>& pose,
                                                                  const FusionConfig& config);

}  // namespace bcomp
