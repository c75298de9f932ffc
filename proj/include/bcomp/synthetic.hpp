#pragma once

#include "bcomp/camera.hpp"
#include "bcomp/frame_io.hpp"
#include "bcomp/plane.hpp"
#include "bcomp/semantic_validator.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

namespace bcomp {

/// Finite rectangle c0 + s (c1 - c0) + t (c3 - c0), s, t in [0, 1].
struct SyntheticPlane {
  int id = 0;
  SemanticClass cls = SemanticClass::Other;
  PlaneEquation equation;
  std::array<Vec3, 4> corners;

  /// Builds the rectangle from its corners; the equation follows from the
  /// corner winding. Throws ConfigError for degenerate or non-rectangular input.
  static SyntheticPlane from_corners(int id, SemanticClass cls, const std::array<Vec3, 4>& corners);
  /// Ray parameter of the hit inside the rectangle, if any.
  [[nodiscard]] std::optional<double> intersect(const Vec3& origin, const Vec3& direction) const;
  [[nodiscard]] double area() const;
};

/// Sensor corruption model. Clean labeled pixels draw lambda from
/// U[0, lambda_clean_max]; corrupted ones from
/// U[lambda_corrupt_min, lambda_corrupt_max].
struct SceneNoise {
  double depth_sigma = 0.0;        // meters
  double label_corruption = 0.0;   // per-pixel flip probability
  double lambda_clean_max = 0.0;
  double lambda_corrupt_min = 0.0;
  double lambda_corrupt_max = 0.0;
  std::uint64_t seed = 1;

  [[nodiscard]] bool writes_confidence() const noexcept {
    return lambda_clean_max > 0.0 || lambda_corrupt_max > 0.0;
  }
};

struct SyntheticScene {
  CameraIntrinsics intrinsics;
  std::vector<SyntheticPlane> planes;
  std::vector<Pose> trajectory;
  SceneNoise noise;

  void validate() const;
  /// Planes whose class is Wall or Ground.
  [[nodiscard]] std::vector<SyntheticPlane> building_components() const;
};

/// Ray casts every pixel against the rectangles (nearest hit wins). Depth is
/// the hit z plus Gaussian noise, quantized to depth units; 0 = no hit.
/// Labels use ClassIdTable::defaults() ids and are corrupted i.i.d.
[[nodiscard]] Frame render_scene(const SyntheticScene& scene, std::size_t frame_index);

/// Line-oriented scene description:
///   intrinsics <fx> <fy> <cx> <cy> <width> <height> <depth_scale>
///   noise <sigma> <corruption> <lambda_clean_max> <lambda_corrupt_min> <lambda_corrupt_max> <seed>
///   plane <id> <class> <nx> <ny> <nz> <d> <4 corners as x y z>
///   pose <timestamp> <tx> <ty> <tz> <qx> <qy> <qz> <qw>
[[nodiscard]] SyntheticScene read_scene_file(const std::filesystem::path& file);
void write_scene_file(const std::filesystem::path& file, const SyntheticScene& scene);

struct BoxRoomOptions {
  std::size_t frames = 30;
  double depth_sigma = 0.0;
  double label_corruption = 0.0;
  double lambda_clean_max = 0.3;
  double lambda_corrupt_min = 0.4;
  double lambda_corrupt_max = 1.0;
  std::uint64_t seed = 7;
};

/// 4 m x 3 m x 2.6 m room: four walls and a floor (building components), a
/// ceiling and a table top (Other), camera circling inside.
[[nodiscard]] SyntheticScene box_room_scene(const BoxRoomOptions& options = {});

/// 8 m corridor, 2 m wide: two opposing walls, floor and ceiling, camera
/// walking along its axis.
[[nodiscard]] SyntheticScene corridor_scene(const BoxRoomOptions& options = {});

/// Renders every trajectory frame into the load_dataset layout and writes
/// groundtruth.txt (the scene description). Returns the number of frames.
std::size_t generate_dataset(const SyntheticScene& scene, const std::filesystem::path& out_dir);

}  // namespace bcomp
