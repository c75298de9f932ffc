#pragma once

#include "bcomp/camera.hpp"
#include "bcomp/fusion.hpp"
#include "bcomp/plane.hpp"

#include <array>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace bcomp {

/// Rectangular extent on a plane: a fixed origin and in-plane axes plus an
/// axis-aligned box in those coordinates.
struct PlaneExtent {
  Vec3 origin = Vec3::Zero();
  PlaneBasis basis{Vec3::UnitX(), Vec3::UnitY()};
  Box2 box;

  [[nodiscard]] Vec3 center() const;
  [[nodiscard]] Vec2 half_lengths() const;
  /// Counter-clockwise around the normal.
  [[nodiscard]] std::array<Vec3, 4> corners() const;
};

struct PlaneLandmark {
  int id = 0;
  SemanticClass cls = SemanticClass::Wall;
  Vec3 normal = Vec3::UnitZ();  // world frame
  double d = 0.0;
  std::size_t support = 0;
  std::vector<double> observations;  // frame timestamps
  PlaneExtent extent;
  std::vector<Point> stored_points;  // world frame, subsampled
};

enum class StructureKind { Room, Corridor };

[[nodiscard]] std::string_view to_string(StructureKind kind) noexcept;

struct StructureNode {
  StructureKind kind = StructureKind::Room;
  std::vector<int> wall_ids;
  std::optional<int> ground_id;
  std::vector<Vec2> footprint;  // horizontal-plane polygon, counter-clockwise

  [[nodiscard]] double area() const;
};

struct StructureEdge {
  std::size_t structure = 0;
  int landmark = 0;
};

struct AssociationConfig {
  double angle_tol = 10.0;   // degrees
  double offset_tol = 0.2;   // meters
  double max_extent_gap = 0.5;  // meters
  std::size_t max_stored_points = 4000;  // per observation

  void validate() const;
};

/// World-frame map. Mutated by a single writer; copies are consistent
/// snapshots.
class SceneGraph {
 public:
  [[nodiscard]] const std::map<int, PlaneLandmark>& landmarks() const noexcept { return landmarks_; }
  [[nodiscard]] const std::vector<StructureNode>& structures() const noexcept { return structures_; }
  [[nodiscard]] const std::vector<StructureEdge>& edges() const noexcept { return edges_; }

  [[nodiscard]] const PlaneLandmark* find(int id) const;
  [[nodiscard]] std::vector<PlaneLandmark> landmark_list() const;
  [[nodiscard]] std::size_t total_support() const noexcept;

  /// Inserts a landmark with a fresh id, returning it.
  int add_landmark(PlaneLandmark landmark);
  [[nodiscard]] PlaneLandmark& landmark(int id);

  /// Replaces the structure layer and rebuilds structure edges.
  void set_structures(std::vector<StructureNode> structures);

  /// Line-oriented export, one record per line:
  ///   landmark <id> <class> <nx> <ny> <nz> <d> <support> <observations>
  ///            <cx> <cy> <cz> <ux> <uy> <uz> <vx> <vy> <vz> <hu> <hv>
  ///   structure <index> <room|corridor> <ground id|-> <wall ids,...> <x,y;x,y;...>
  ///   edge <structure index> <landmark id>
  void write(std::ostream& os) const;
  [[nodiscard]] std::string to_text() const;

 private:
  std::map<int, PlaneLandmark> landmarks_;
  std::vector<StructureNode> structures_;
  std::vector<StructureEdge> edges_;
  int next_id_ = 0;
};

/// Plane (normal, d) of a camera-frame component expressed in the world.
[[nodiscard]] PlaneEquation to_world(const ValidatedComponent& component, const Pose& pose);
[[nodiscard]] PlaneEquation to_world(const PlaneEquation& camera_plane, const Pose& pose);

/// Merges the component into the best same-class landmark passing the angle,
/// offset and extent-gap gates, or creates a new landmark. Returns its id.
int associate(SceneGraph& graph, const ValidatedComponent& component, const Pose& pose,
              const AssociationConfig& config);

struct StructureConfig {
  double parallel_tol = 10.0;       // degrees
  double perpendicular_tol = 10.0;  // degrees
  double min_separation = 0.5;      // meters
  double max_separation = 12.0;     // meters
  double corridor_aspect = 2.0;     // overlap length / separation
};

/// Room / corridor inference from the wall and ground layout.
[[nodiscard]] std::vector<StructureNode> infer_structures(const SceneGraph& graph, const Vec3& gravity_up,
                                                          const StructureConfig& config = {});

}  // namespace bcomp
