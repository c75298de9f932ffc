#include "bcomp/camera.hpp"
#include "bcomp/common.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace bcomp {

std::string_view to_string(SemanticClass c) noexcept {
  switch (c) {
    case SemanticClass::Wall: return "wall";
    case SemanticClass::Ground: return "ground";
    case SemanticClass::Other: return "other";
  }
  return "other";
}

std::string_view to_string(FrameId f) noexcept {
  return f == FrameId::Camera ? "camera" : "world";
}

std::optional<SemanticClass> parse_semantic_class(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "wall") return SemanticClass::Wall;
  if (lower == "ground" || lower == "floor") return SemanticClass::Ground;
  if (lower == "other") return SemanticClass::Other;
  return std::nullopt;
}

double angle_deg(const Vec3& a, const Vec3& b) noexcept {
  const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return rad2deg(std::acos(c));
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("intrinsics: image size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw ConfigError("intrinsics: principal point outside the image");
  if (!(depth_scale > 0.0)) throw ConfigError("intrinsics: depth_scale must be positive");
}

Pose::Pose(const Eigen::Quaterniond& rotation, const Vec3& translation, double timestamp)
    : rotation_(rotation), translation_(translation), timestamp_(timestamp) {
  const double n = rotation.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-3)
    throw ConfigError("pose: quaternion is not unit length");
  if (!translation.allFinite()) throw ConfigError("pose: non-finite translation");
  rotation_.normalize();
}

Pose Pose::from_matrix(const Mat3& rotation, const Vec3& translation, double timestamp) {
  return Pose(Eigen::Quaterniond(rotation), translation, timestamp);
}

Pose look_along(const Vec3& position, const Vec3& forward, const Vec3& up, double timestamp) {
  const Vec3 f = forward.normalized();
  const Vec3 right = f.cross(up).normalized();
  const Vec3 down = f.cross(right);
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = f;
  return Pose::from_matrix(r, position, timestamp);
}

}  // namespace bcomp
