#pragma once

#include "bcomp/common.hpp"

#include <Eigen/Geometry>

namespace bcomp {

struct CameraIntrinsics {
  double fx = 525.0;
  double fy = 525.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;
  double depth_scale = 1000.0;  // raw depth units per meter

  /// Throws ConfigError when any invariant is violated.
  void validate() const;
};

/// Camera-to-world rigid transform: p_world = R * p_cam + t.
class Pose {
 public:
  Pose() = default;
  /// Normalizes the quaternion. Throws ConfigError if its norm is far from 1.
  Pose(const Eigen::Quaterniond& rotation, const Vec3& translation, double timestamp = 0.0);

  static Pose identity(double timestamp = 0.0) { return Pose(Eigen::Quaterniond::Identity(), Vec3::Zero(), timestamp); }
  /// Builds a pose from a rotation matrix whose columns are the camera axes
  /// expressed in world coordinates.
  static Pose from_matrix(const Mat3& rotation, const Vec3& translation, double timestamp = 0.0);

  [[nodiscard]] const Eigen::Quaterniond& rotation() const noexcept { return rotation_; }
  [[nodiscard]] Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }
  [[nodiscard]] const Vec3& translation() const noexcept { return translation_; }
  [[nodiscard]] double timestamp() const noexcept { return timestamp_; }

  [[nodiscard]] Vec3 to_world(const Vec3& p_cam) const { return rotation_ * p_cam + translation_; }
  [[nodiscard]] Vec3 to_camera(const Vec3& p_world) const { return rotation_.conjugate() * (p_world - translation_); }

 private:
  Eigen::Quaterniond rotation_ = Eigen::Quaterniond::Identity();
  Vec3 translation_ = Vec3::Zero();
  double timestamp_ = 0.0;
};

/// Camera looking along `forward` with image rows pointing away from `up`
/// (x right, y down, z forward).
[[nodiscard]] Pose look_along(const Vec3& position, const Vec3& forward, const Vec3& up, double timestamp = 0.0);

}  // namespace bcomp
