#pragma once

#include "bcomp/camera.hpp"
#include "bcomp/common.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bcomp {

struct PlaneLandmark;

/// One RGB-D observation. Confidence values v map to uncertainty v / 255.
struct Frame {
  double timestamp = 0.0;
  DepthImage depth;
  RgbImage rgb;
  std::optional<LabelImage> labels;
  std::optional<ConfidenceImage> confidence;
  std::optional<Pose> pose;
};

struct Dataset {
  CameraIntrinsics intrinsics;
  std::vector<Frame> frames;  // sorted by timestamp
  std::size_t skipped_frames = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> errors;
};

/// Maximum timestamp difference for associating streams.
inline constexpr double kAssociationWindow = 0.02;

/// Loads a TUM-style directory:
///   intrinsics.txt   fx fy cx cy width height depth_scale
///   poses.txt        timestamp tx ty tz qx qy qz qw   (optional)
///   depth/<t>.png    16-bit depth
///   rgb/<t>.png      8-bit RGB
///   label/<t>.png    16-bit class ids (optional)
///   conf/<t>.png     8-bit confidence (optional)
/// Throws ConfigError when intrinsics.txt is missing or invalid. Frames
/// lacking a matched depth/rgb pair or with unreadable images are skipped
/// and counted.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& root);

/// Writes frames in the layout understood by load_dataset. Images that are
/// absent from a frame are not written. Throws IoError on failure.
void write_dataset(const std::filesystem::path& root, const CameraIntrinsics& intrinsics,
                   std::span<const Frame> frames);

[[nodiscard]] CameraIntrinsics read_intrinsics(const std::filesystem::path& file);
void write_intrinsics(const std::filesystem::path& file, const CameraIntrinsics& intrinsics);
[[nodiscard]] std::vector<Pose> read_poses(const std::filesystem::path& file);

/// Canonical on-disk file stem for a timestamp.
[[nodiscard]] std::string timestamp_stem(double timestamp);

/// Greedy one-to-one association of two sorted timestamp lists. Returns, for
/// each element of `a`, the matched index into `b` or nullopt.
[[nodiscard]] std::vector<std::optional<std::size_t>> associate_timestamps(
    std::span<const double> a, std::span<const double> b, double window = kAssociationWindow);

enum class PlyColorMode { ColorCoded, RgbTextured };

/// Fixed display color for a landmark in color-coded exports.
[[nodiscard]] Rgb landmark_color(SemanticClass cls, int id) noexcept;

/// ASCII PLY with one `x y z red green blue` vertex per stored landmark
/// point. Throws IoError when the file cannot be written.
void export_ply(std::span<const PlaneLandmark> landmarks, const std::filesystem::path& path, PlyColorMode mode);

}  // namespace bcomp
