#include "bcomp/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace bcomp {

void FusionConfig::validate() const {
  if (!(epsilon_match > 0.0 && epsilon_match <= 1.0)) throw ConfigError("fusion: epsilon_match must be in (0, 1]");
  if (!(tau_dist > 0.0)) throw ConfigError("fusion: tau_dist must be positive");
  if (!(theta_normal > 0.0)) throw ConfigError("fusion: theta_normal must be positive");
  if (!(min_area > 0.0)) throw ConfigError("fusion: min_area must be positive");
  if (min_inliers <= 0) throw ConfigError("fusion: min_inliers must be positive");
  if (!(vertical_tol > 0.0) || !(horizontal_tol > 0.0)) throw ConfigError("fusion: tolerances must be positive");
}

namespace {

// Angle between the planes' normals irrespective of orientation, degrees.
double unsigned_normal_angle(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(std::abs(a.dot(b)) / (a.norm() * b.norm()), 0.0, 1.0);
  return rad2deg(std::acos(c));
}

}  // namespace

double match(const Plane& geometric, const SemanticPlane& semantic, const FusionConfig& config) {
  if (unsigned_normal_angle(geometric.normal, semantic.plane.normal) > config.theta_normal) return 0.0;
  const double total = static_cast<double>(semantic.plane.inliers.size());
  if (total == 0.0) return 0.0;
  std::size_t covered = 0;
  for (std::uint32_t idx : semantic.plane.inliers) {
    if (idx >= semantic.points.size()) continue;
    if (geometric.distance(semantic.points[idx].position) <= config.tau_dist) ++covered;
  }
  return static_cast<double>(covered) / total;
}

std::vector<ValidatedComponent> fuse_frame(const PointCloud& geometric_cloud, std::span<const Plane> geometric,
                                           std::span<const SemanticPlane> semantic, const FusionConfig& config,
                                           double timestamp) {
  struct Candidate {
    double score;
    std::size_t geometric_support;
    std::size_t g;
    std::size_t s;
  };
  std::vector<Candidate> candidates;
  for (std::size_t g = 0; g < geometric.size(); ++g) {
    for (std::size_t s = 0; s < semantic.size(); ++s) {
      const double score = match(geometric[g], semantic[s], config);
      if (score >= config.epsilon_match) candidates.push_back({score, geometric[g].inliers.size(), g, s});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::make_tuple(-a.score, -static_cast<double>(a.geometric_support), a.g, a.s) <
           std::make_tuple(-b.score, -static_cast<double>(b.geometric_support), b.g, b.s);
  });

  std::vector<bool> g_used(geometric.size(), false);
  std::vector<bool> s_used(semantic.size(), false);
  std::vector<ValidatedComponent> out;
  for (const Candidate& c : candidates) {
    if (g_used[c.g] || s_used[c.s]) continue;
    g_used[c.g] = s_used[c.s] = true;
    ValidatedComponent vc;
    vc.plane = geometric[c.g];
    vc.cls = semantic[c.s].cls;
    vc.match_score = c.score;
    vc.frame_timestamp = timestamp;
    vc.geometric_index = c.g;
    vc.points.reserve(vc.plane.inliers.size());
    for (std::uint32_t idx : vc.plane.inliers)
      if (idx < geometric_cloud.size()) vc.points.push_back(geometric_cloud.points[idx]);
    out.push_back(std::move(vc));
  }
  std::sort(out.begin(), out.end(), [](const ValidatedComponent& a, const ValidatedComponent& b) {
    return a.geometric_index < b.geometric_index;
  });
  return out;
}

std::vector<ValidatedComponent> remove_dangling(std::span<const ValidatedComponent> components,
                                                const FusionConfig& config) {
  const std::size_t min_support = static_cast<std::size_t>(config.min_inliers / 4);
  std::vector<ValidatedComponent> out;
  for (const ValidatedComponent& c : components) {
    if (c.plane.inliers.size() < min_support) continue;
    if (projected_extent_area(c.points, c.plane.normal) < config.min_area) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<ValidatedComponent> structural_validate(std::span<const ValidatedComponent> components,
                                                    const GravityReference& gravity, const std::optional<Pose>& pose,
                                                    const FusionConfig& config) {
  Vec3 up;
  Mat3 rotation = Mat3::Identity();
  if (pose && gravity.world_up) {
    up = *gravity.world_up;
    rotation = pose->rotation_matrix();
  } else if (gravity.camera_up) {
    up = *gravity.camera_up;
  } else {
    throw ConfigError("structural_validate: need a pose with world gravity or a camera-frame gravity vector");
  }
  if (!(up.norm() > 0.0)) throw ConfigError("structural_validate: zero gravity vector");
  up.normalize();

  std::vector<ValidatedComponent> out;
  for (const ValidatedComponent& c : components) {
    const Vec3 n = (rotation * c.plane.normal).normalized();
    const double tilt = unsigned_normal_angle(n, up);  // 0 = horizontal plane, 90 = vertical
    bool keep = false;
    if (c.cls == SemanticClass::Ground) keep = tilt <= config.horizontal_tol;
    else if (c.cls == SemanticClass::Wall) keep = std::abs(90.0 - tilt) <= config.vertical_tol;
    if (keep) out.push_back(c);
  }
  return out;
}

}  // namespace bcomp
