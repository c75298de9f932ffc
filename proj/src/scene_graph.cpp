#include "bcomp/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <tuple>

namespace bcomp {

std::string_view to_string(StructureKind kind) noexcept {
  return kind == StructureKind::Room ? "room" : "corridor";
}

// ---------------------------------------------------------------------------
// Polygon helpers (2D, counter-clockwise)

namespace {

double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

void make_ccw(std::vector<Vec2>& poly) {
  if (signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Sutherland-Hodgman clip of `subject` against convex `clip`.
std::vector<Vec2> clip_convex(std::vector<Vec2> subject, const std::vector<Vec2>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    const auto inside = [&](const Vec2& p) { return cross2(b - a, p - a) >= -1e-12; };
    std::vector<Vec2> out;
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Vec2& p = subject[i];
      const Vec2& q = subject[(i + 1) % subject.size()];
      const bool pin = inside(p);
      const bool qin = inside(q);
      if (pin) out.push_back(p);
      if (pin != qin) {
        const double denom = cross2(b - a, q - p);
        if (std::abs(denom) > 1e-15) {
          const double t = cross2(b - a, a - p) / denom;
          out.push_back(p + t * (q - p));
        }
      }
    }
    subject = std::move(out);
  }
  return subject;
}

double intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() < 3 || b.size() < 3) return 0.0;
  const std::vector<Vec2> clipped = clip_convex(a, b);
  return clipped.size() < 3 ? 0.0 : std::abs(signed_area(clipped));
}

}  // namespace

double StructureNode::area() const { return footprint.size() < 3 ? 0.0 : std::abs(signed_area(footprint)); }

// ---------------------------------------------------------------------------
// PlaneExtent

Vec3 PlaneExtent::center() const {
  const Vec2 c = 0.5 * (box.min + box.max);
  return origin + c.x() * basis.u + c.y() * basis.v;
}

Vec2 PlaneExtent::half_lengths() const {
  const Vec2 h = 0.5 * (box.max - box.min);
  return h.cwiseMax(Vec2::Constant(1e-6));
}

std::array<Vec3, 4> PlaneExtent::corners() const {
  const Vec3 c = center();
  const Vec2 h = half_lengths();
  const Vec3 du = h.x() * basis.u;
  const Vec3 dv = h.y() * basis.v;
  return {c - du - dv, c + du - dv, c + du + dv, c - du + dv};
}

// ---------------------------------------------------------------------------
// SceneGraph

void AssociationConfig::validate() const {
  if (!(angle_tol > 0.0) || !(offset_tol > 0.0) || !(max_extent_gap >= 0.0))
    throw ConfigError("association: tolerances must be positive");
  if (max_stored_points == 0) throw ConfigError("association: max_stored_points must be positive");
}

const PlaneLandmark* SceneGraph::find(int id) const {
  const auto it = landmarks_.find(id);
  return it == landmarks_.end() ? nullptr : &it->second;
}

std::vector<PlaneLandmark> SceneGraph::landmark_list() const {
  std::vector<PlaneLandmark> out;
  out.reserve(landmarks_.size());
  for (const auto& [id, l] : landmarks_) out.push_back(l);
  return out;
}

std::size_t SceneGraph::total_support() const noexcept {
  std::size_t s = 0;
  for (const auto& [id, l] : landmarks_) s += l.support;
  return s;
}

int SceneGraph::add_landmark(PlaneLandmark landmark) {
  landmark.id = next_id_++;
  const int id = landmark.id;
  landmarks_.emplace(id, std::move(landmark));
  return id;
}

PlaneLandmark& SceneGraph::landmark(int id) {
  const auto it = landmarks_.find(id);
  if (it == landmarks_.end()) throw ConfigError("unknown landmark id " + std::to_string(id));
  return it->second;
}

void SceneGraph::set_structures(std::vector<StructureNode> structures) {
  structures_ = std::move(structures);
  edges_.clear();
  for (std::size_t s = 0; s < structures_.size(); ++s) {
    for (int w : structures_[s].wall_ids)
      if (landmarks_.contains(w)) edges_.push_back({s, w});
    if (structures_[s].ground_id && landmarks_.contains(*structures_[s].ground_id))
      edges_.push_back({s, *structures_[s].ground_id});
  }
}

namespace {

std::string fmt(double v) {
  char buf[48];
  // Avoid "-0.000000" so exports compare equal across sign-of-zero noise.
  if (std::abs(v) < 5e-7) v = 0.0;
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void SceneGraph::write(std::ostream& os) const {
  os << "# scene-graph v1\n";
  for (const auto& [id, l] : landmarks_) {
    const Vec3 c = l.extent.center();
    const Vec2 h = l.extent.half_lengths();
    const Vec3& u = l.extent.basis.u;
    const Vec3& v = l.extent.basis.v;
    os << "landmark " << id << ' ' << to_string(l.cls) << ' ' << fmt(l.normal.x()) << ' ' << fmt(l.normal.y()) << ' '
       << fmt(l.normal.z()) << ' ' << fmt(l.d) << ' ' << l.support << ' ' << l.observations.size() << ' '
       << fmt(c.x()) << ' ' << fmt(c.y()) << ' ' << fmt(c.z()) << ' ' << fmt(u.x()) << ' ' << fmt(u.y()) << ' '
       << fmt(u.z()) << ' ' << fmt(v.x()) << ' ' << fmt(v.y()) << ' ' << fmt(v.z()) << ' ' << fmt(h.x()) << ' '
       << fmt(h.y()) << '\n';
  }
  for (std::size_t s = 0; s < structures_.size(); ++s) {
    const StructureNode& node = structures_[s];
    os << "structure " << s << ' ' << to_string(node.kind) << ' ';
    if (node.ground_id) os << *node.ground_id;
    else os << '-';
    os << ' ';
    for (std::size_t i = 0; i < node.wall_ids.size(); ++i) os << (i ? "," : "") << node.wall_ids[i];
    os << ' ';
    for (std::size_t i = 0; i < node.footprint.size(); ++i)
      os << (i ? ";" : "") << fmt(node.footprint[i].x()) << ',' << fmt(node.footprint[i].y());
    os << '\n';
  }
  for (const StructureEdge& e : edges_) os << "edge " << e.structure << ' ' << e.landmark << '\n';
}

std::string SceneGraph::to_text() const {
  std::ostringstream os;
  write(os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Association

PlaneEquation to_world(const PlaneEquation& camera_plane, const Pose& pose) {
  const Vec3 n = (pose.rotation() * camera_plane.normal).normalized();
  return PlaneEquation{n, camera_plane.d - n.dot(pose.translation())};
}

PlaneEquation to_world(const ValidatedComponent& component, const Pose& pose) {
  return to_world(PlaneEquation{component.plane.normal, component.plane.d}, pose);
}

namespace {

std::vector<Point> subsample(const std::vector<Point>& points, std::size_t cap) {
  if (points.size() <= cap) return points;
  const std::size_t step = (points.size() + cap - 1) / cap;
  std::vector<Point> out;
  out.reserve(cap);
  for (std::size_t i = 0; i < points.size(); i += step) out.push_back(points[i]);
  return out;
}

std::vector<Vec3> positions(const std::vector<Point>& points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Point& p : points) out.push_back(p.position);
  return out;
}

}  // namespace

int associate(SceneGraph& graph, const ValidatedComponent& component, const Pose& pose,
              const AssociationConfig& config) {
  const PlaneEquation eq = to_world(component, pose);
  std::vector<Point> world = component.points;
  for (Point& p : world) p.position = pose.to_world(p.position);
  const std::vector<Vec3> world_pos = positions(world);
  const std::size_t count = std::max<std::size_t>(component.plane.inliers.size(), 1);

  int best_id = -1;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& [id, l] : graph.landmarks()) {
    if (l.cls != component.cls) continue;
    const double angle = angle_deg(l.normal, eq.normal);
    const double offset = std::abs(l.d - eq.d);
    if (angle > config.angle_tol || offset > config.offset_tol) continue;
    const Box2 box = project_bounds(world_pos, l.extent.origin, l.extent.basis);
    if (!world_pos.empty() && l.extent.box.gap(box) > config.max_extent_gap) continue;
    const double cost = angle / config.angle_tol + offset / config.offset_tol;
    if (cost < best_cost) {
      best_cost = cost;
      best_id = id;
    }
  }

  if (best_id < 0) {
    PlaneLandmark l;
    l.cls = component.cls;
    l.normal = eq.normal;
    l.d = eq.d;
    l.support = count;
    l.observations.push_back(component.frame_timestamp);
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : world_pos) centroid += p;
    if (!world_pos.empty()) centroid /= static_cast<double>(world_pos.size());
    else centroid = -eq.d * eq.normal;
    l.extent.origin = centroid - (eq.normal.dot(centroid) + eq.d) * eq.normal;
    l.extent.basis = plane_basis(eq.normal);
    l.extent.box = project_bounds(world_pos, l.extent.origin, l.extent.basis);
    l.stored_points = subsample(world, config.max_stored_points);
    return graph.add_landmark(std::move(l));
  }

  PlaneLandmark& l = graph.landmark(best_id);
  const double wl = static_cast<double>(l.support);
  const double wc = static_cast<double>(count);
  l.normal = (wl * l.normal + wc * eq.normal).normalized();
  l.d = (wl * l.d + wc * eq.d) / (wl + wc);
  l.support += count;
  l.observations.push_back(component.frame_timestamp);

  PlaneExtent& ext = l.extent;
  const Vec3 u = (ext.basis.u - ext.basis.u.dot(l.normal) * l.normal).normalized();
  ext.basis = PlaneBasis{u, l.normal.cross(u)};
  ext.origin -= (l.normal.dot(ext.origin) + l.d) * l.normal;
  if (!world_pos.empty()) ext.box = ext.box.united(project_bounds(world_pos, ext.origin, ext.basis));

  const std::vector<Point> kept = subsample(world, config.max_stored_points);
  l.stored_points.insert(l.stored_points.end(), kept.begin(), kept.end());
  return best_id;
}

// ---------------------------------------------------------------------------
// Structure inference

namespace {

struct WallSegment {
  int id;
  Vec2 normal;   // unit, horizontal, facing the observed side
  Vec2 tangent;  // normal rotated by +90 degrees
  double offset; // line: normal . x = offset
  double s_min, s_max;
  [[nodiscard]] Vec2 point(double s) const { return offset * normal + s * tangent; }
  [[nodiscard]] Vec2 midpoint() const { return point(0.5 * (s_min + s_max)); }
};

struct OpposingPair {
  std::size_t a, b;  // indices into the segment list
  double separation;
  double overlap;
  std::vector<Vec2> footprint;
};

std::optional<Vec2> line_intersection(const WallSegment& p, const WallSegment& q) {
  Eigen::Matrix2d m;
  m << p.normal.x(), p.normal.y(), q.normal.x(), q.normal.y();
  const double det = m.determinant();
  if (std::abs(det) < 1e-9) return std::nullopt;
  return Vec2(m.inverse() * Vec2(p.offset, q.offset));
}

}  // namespace

std::vector<StructureNode> infer_structures(const SceneGraph& graph, const Vec3& gravity_up,
                                            const StructureConfig& config) {
  const Vec3 up = gravity_up.normalized();
  const PlaneBasis horizontal = plane_basis(up);
  const auto project = [&](const Vec3& p) { return Vec2(p.dot(horizontal.u), p.dot(horizontal.v)); };

  std::vector<WallSegment> walls;
  std::vector<std::pair<int, std::vector<Vec2>>> grounds;
  for (const auto& [id, l] : graph.landmarks()) {
    if (l.cls == SemanticClass::Ground) {
      std::vector<Vec2> poly;
      for (const Vec3& c : l.extent.corners()) poly.push_back(project(c));
      make_ccw(poly);
      grounds.emplace_back(id, std::move(poly));
      continue;
    }
    if (l.cls != SemanticClass::Wall) continue;
    const Vec2 n2 = project(l.normal);
    if (n2.norm() < 0.5) continue;  // not a vertical surface
    WallSegment w;
    w.id = id;
    w.normal = n2.normalized();
    w.tangent = Vec2(-w.normal.y(), w.normal.x());
    w.offset = w.normal.dot(project(l.extent.center()));
    w.s_min = std::numeric_limits<double>::infinity();
    w.s_max = -w.s_min;
    for (const Vec3& c : l.extent.corners()) {
      const double s = w.tangent.dot(project(c));
      w.s_min = std::min(w.s_min, s);
      w.s_max = std::max(w.s_max, s);
    }
    walls.push_back(w);
  }

  const double cos_parallel = std::cos(deg2rad(config.parallel_tol));
  const double sin_perpendicular = std::sin(deg2rad(config.perpendicular_tol));

  std::vector<OpposingPair> pairs;
  for (std::size_t i = 0; i < walls.size(); ++i) {
    for (std::size_t j = i + 1; j < walls.size(); ++j) {
      const WallSegment& a = walls[i];
      const WallSegment& b = walls[j];
      if (a.normal.dot(b.normal) > -cos_parallel) continue;
      const Vec2 ab = b.midpoint() - a.midpoint();
      const double ga = a.normal.dot(ab);
      const double gb = -b.normal.dot(ab);
      if (ga <= 0.0 || gb <= 0.0) continue;  // not facing each other
      const double separation = 0.5 * (ga + gb);
      if (separation < config.min_separation || separation > config.max_separation) continue;
      const double b0 = a.tangent.dot(b.point(b.s_min));
      const double b1 = a.tangent.dot(b.point(b.s_max));
      const double lo = std::max(a.s_min, std::min(b0, b1));
      const double hi = std::min(a.s_max, std::max(b0, b1));
      if (hi <= lo) continue;
      OpposingPair pair{i, j, separation, hi - lo, {}};
      pair.footprint = {a.point(lo), a.point(hi), a.point(hi) + separation * a.normal,
                        a.point(lo) + separation * a.normal};
      make_ccw(pair.footprint);
      pairs.push_back(std::move(pair));
    }
  }

  struct RoomCandidate {
    std::size_t p, q;
    std::vector<Vec2> footprint;
    double area;
  };
  std::vector<RoomCandidate> rooms;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t q = p + 1; q < pairs.size(); ++q) {
      const OpposingPair& P = pairs[p];
      const OpposingPair& Q = pairs[q];
      if (P.a == Q.a || P.a == Q.b || P.b == Q.a || P.b == Q.b) continue;
      if (std::abs(walls[P.a].normal.dot(walls[Q.a].normal)) > sin_perpendicular) continue;
      if (intersection_area(P.footprint, Q.footprint) <= 1e-9) continue;
      const auto c0 = line_intersection(walls[P.a], walls[Q.a]);
      const auto c1 = line_intersection(walls[Q.a], walls[P.b]);
      const auto c2 = line_intersection(walls[P.b], walls[Q.b]);
      const auto c3 = line_intersection(walls[Q.b], walls[P.a]);
      if (!c0 || !c1 || !c2 || !c3) continue;
      std::vector<Vec2> poly{*c0, *c1, *c2, *c3};
      make_ccw(poly);
      const double area = std::abs(signed_area(poly));
      rooms.push_back({p, q, std::move(poly), area});
    }
  }
  const auto centroid_key = [](const std::vector<Vec2>& poly) {
    Vec2 c = Vec2::Zero();
    for (const Vec2& v : poly) c += v;
    c /= static_cast<double>(std::max<std::size_t>(poly.size(), 1));
    return std::make_pair(c.x(), c.y());
  };
  std::stable_sort(rooms.begin(), rooms.end(), [&](const RoomCandidate& x, const RoomCandidate& y) {
    if (x.area != y.area) return x.area < y.area;
    return centroid_key(x.footprint) < centroid_key(y.footprint);
  });

  std::vector<bool> used(walls.size(), false);
  std::vector<StructureNode> out;
  for (const RoomCandidate& r : rooms) {
    const std::array<std::size_t, 4> members{pairs[r.p].a, pairs[r.q].a, pairs[r.p].b, pairs[r.q].b};
    if (std::any_of(members.begin(), members.end(), [&](std::size_t m) { return used[m]; })) continue;
    StructureNode node;
    node.kind = StructureKind::Room;
    for (std::size_t m : members) {
      used[m] = true;
      node.wall_ids.push_back(walls[m].id);
    }
    node.footprint = r.footprint;
    out.push_back(std::move(node));
  }

  std::vector<std::size_t> corridor_pairs;
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (pairs[p].overlap >= config.corridor_aspect * pairs[p].separation) corridor_pairs.push_back(p);
  std::stable_sort(corridor_pairs.begin(), corridor_pairs.end(), [&](std::size_t x, std::size_t y) {
    if (pairs[x].separation != pairs[y].separation) return pairs[x].separation < pairs[y].separation;
    if (pairs[x].overlap != pairs[y].overlap) return pairs[x].overlap > pairs[y].overlap;
    return centroid_key(pairs[x].footprint) < centroid_key(pairs[y].footprint);
  });
  for (std::size_t p : corridor_pairs) {
    const OpposingPair& pair = pairs[p];
    if (used[pair.a] || used[pair.b]) continue;
    used[pair.a] = used[pair.b] = true;
    StructureNode node;
    node.kind = StructureKind::Corridor;
    node.wall_ids = {walls[pair.a].id, walls[pair.b].id};
    node.footprint = pair.footprint;
    out.push_back(std::move(node));
  }

  for (StructureNode& node : out) {
    double best = 1e-9;
    for (const auto& [id, poly] : grounds) {
      const double a = intersection_area(node.footprint, poly);
      if (a > best) {
        best = a;
        node.ground_id = id;
      }
    }
  }
  return out;
}

}  // namespace bcomp
