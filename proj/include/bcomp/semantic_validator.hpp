#pragma once

#include "bcomp/camera.hpp"
#include "bcomp/frame_io.hpp"
#include "bcomp/geometric_estimator.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

namespace bcomp {

/// Maps raw segmentation ids to building-component classes. Unmapped ids
/// resolve to Other.
class ClassIdTable {
 public:
  ClassIdTable() = default;

  /// wall=1, ground=2, other=3; the ids used by the synthetic renderer.
  static ClassIdTable defaults();

  void set(std::uint16_t id, SemanticClass cls) { table_[id] = cls; }
  [[nodiscard]] SemanticClass lookup(std::uint16_t id) const noexcept;
  /// Lowest id mapped to the class, used when rendering labels.
  [[nodiscard]] std::optional<std::uint16_t> id_for(SemanticClass cls) const noexcept;
  [[nodiscard]] const std::map<std::uint16_t, SemanticClass>& entries() const noexcept { return table_; }

  /// Parses one `id=wall|ground|other` entry. Throws ConfigError.
  void parse_entry(std::string_view line);
  /// Reads `id=class` lines; blank lines and `#` comments are ignored.
  static ClassIdTable read(const std::filesystem::path& file);

 private:
  std::map<std::uint16_t, SemanticClass> table_;
};

/// Filtered label map: only Wall/Ground survive, everything else is null.
/// lambda holds per-pixel uncertainty in [0, 1] (0 = fully confident).
struct LabelMap {
  Image<std::optional<SemanticClass>> labels;
  Image<float> lambda;

  [[nodiscard]] std::size_t labeled_count() const noexcept;
};

struct SemanticPlane {
  Plane plane;  // inlier indices refer to `points`
  SemanticClass cls = SemanticClass::Wall;
  double mean_lambda = 0.0;
  std::vector<Point> points;  // camera-frame inlier points
};

/// Class filtration. Throws ConfigError if the confidence image does not
/// share the label image dimensions.
[[nodiscard]] LabelMap class_filter(const LabelImage& raw_labels, const ClassIdTable& id_table,
                                    const ConfidenceImage* confidence = nullptr);

/// Back-projected points of one class with lambda <= lambda_max, sampled on
/// a `stride` pixel grid.
struct ClassCloud {
  PointCloud cloud;
  std::vector<float> lambda;  // parallel to cloud.points
};
[[nodiscard]] ClassCloud gather_class_points(const Frame& frame, const LabelMap& label_map,
                                             const CameraIntrinsics& intrinsics, SemanticClass cls,
                                             double lambda_max, int stride = 1);

/// Second RANSAC pass run per class on the labeled pixels, with
/// min_inliers = config.min_inliers / 4. Output is ordered by decreasing
/// support (ties: Wall before Ground).
[[nodiscard]] std::vector<SemanticPlane> extract_semantic_planes(const Frame& frame, const LabelMap& label_map,
                                                                 const CameraIntrinsics& intrinsics,
                                                                 const RansacConfig& config, double lambda_max,
                                                                 int stride = 1);

}  // namespace bcomp
