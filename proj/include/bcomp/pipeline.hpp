#pragma once

#include "bcomp/evaluation.hpp"
#include "bcomp/frame_io.hpp"
#include "bcomp/fusion.hpp"
#include "bcomp/geometric_estimator.hpp"
#include "bcomp/scene_graph.hpp"
#include "bcomp/semantic_validator.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bcomp {

struct PipelineConfig {
  // preprocessing
  int pixel_stride = 3;
  double voxel_size = 0.05;
  double depth_min = 0.3;
  double depth_max = 5.0;
  // estimation
  RansacConfig ransac;
  int semantic_stride = 4;
  double lambda_max = 0.5;
  ClassIdTable class_table = ClassIdTable::defaults();
  // validation and mapping
  FusionConfig fusion;
  AssociationConfig association;
  StructureConfig structures;
  MatchTolerance ground_truth_tolerance;
  Vec3 gravity_up = Vec3::UnitZ();
  std::optional<Vec3> camera_gravity_up;  // used for frames without a pose
  int frame_stride = 1;
  bool parallel = true;
  // outputs
  std::optional<std::filesystem::path> graph_out;
  std::optional<std::filesystem::path> ply_out;
  PlyColorMode ply_mode = PlyColorMode::ColorCoded;
  std::optional<std::filesystem::path> report_out;
  std::optional<std::filesystem::path> ground_truth;

  void validate() const;

  /// Applies one `key = value` setting. Integer keys are class-table
  /// entries (`3 = wall`). Throws ConfigError for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Reads a key/value file (`#` comments, blank lines ignored).
  void load_file(const std::filesystem::path& file);
};

struct StageStats {
  std::size_t count = 0;
  double total_ms = 0.0;
  double max_ms = 0.0;

  void add(double ms) noexcept;
  [[nodiscard]] double mean_ms() const noexcept { return count == 0 ? 0.0 : total_ms / static_cast<double>(count); }
};

/// Wall-clock latency per stage, keyed by stage name (geometric, semantic,
/// fusion, association, frame).
struct TimingReport {
  std::map<std::string, StageStats> stages;
  void write(std::ostream& os) const;
};

/// Per-frame output of the two estimation stages and the fusion step.
struct FrameResult {
  double timestamp = 0.0;
  std::vector<Plane> geometric_planes;
  std::vector<SemanticPlane> semantic_planes;
  std::vector<ValidatedComponent> components;  // after dangling and structural filtering
};

struct PipelineResult {
  SceneGraph graph;
  std::optional<RecognitionReport> report;
  TimingReport timing;
  std::size_t frames_processed = 0;
  std::size_t frames_failed = 0;
  std::vector<std::string> errors;
};

/// Observer invoked with a snapshot of the graph after each processed frame.
using FrameObserver = std::function<void(const FrameResult&, const SceneGraph&)>;

/// Runs both estimation stages on one frame and fuses them. `frame_index`
/// is the frame's position in the dataset; it seeds RANSAC so results do not
/// depend on which other frames are processed.
[[nodiscard]] FrameResult process_frame(const Frame& frame, std::size_t frame_index, const CameraIntrinsics& intrinsics,
                                        const PipelineConfig& config, TimingReport* timing = nullptr);

/// Processes stride-selected frames in timestamp order, associates them into
/// the scene graph, infers structures, evaluates against ground truth when
/// configured and writes the configured outputs.
[[nodiscard]] PipelineResult run_pipeline(const Dataset& dataset, const PipelineConfig& config,
                                          const FrameObserver& observer = {});
[[nodiscard]] PipelineResult run_pipeline(const std::filesystem::path& dataset_root, const PipelineConfig& config);

/// Line-oriented summary: counts, recognition metrics and timing.
void write_report(std::ostream& os, const PipelineResult& result);

}  // namespace bcomp
