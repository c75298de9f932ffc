#include "bcomp/geometric_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace bcomp {

void RansacConfig::validate() const {
  if (max_iterations <= 0) throw ConfigError("ransac: max_iterations must be positive");
  if (!(epsilon_inlier > 0.0)) throw ConfigError("ransac: epsilon_inlier must be positive");
  if (min_inliers <= 0) throw ConfigError("ransac: min_inliers must be positive");
  if (max_planes <= 0) throw ConfigError("ransac: max_planes must be positive");
}

int scaled_min_inliers(int base, std::size_t cloud_size) noexcept {
  const double scaled = static_cast<double>(base) * static_cast<double>(cloud_size) / 30000.0;
  return std::max(static_cast<int>(std::lround(scaled)), 50);
}

namespace {

constexpr double kCollinearTolerance = 1e-12;
constexpr double kRefitRetention = 0.95;
constexpr int kRefitRounds = 3;

// Structure-of-arrays view of the working points.
struct WorkingSet {
  std::vector<double> x, y, z;
  std::vector<std::uint32_t> source;  // index into the caller's cloud

  explicit WorkingSet(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    x.resize(n);
    y.resize(n);
    z.resize(n);
    source.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3& p = cloud.points[i].position;
      x[i] = p.x();
      y[i] = p.y();
      z[i] = p.z();
      source[i] = static_cast<std::uint32_t>(i);
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
  [[nodiscard]] Vec3 at(std::size_t i) const { return Vec3(x[i], y[i], z[i]); }

  // Removes the (sorted, local) indices.
  void erase(const std::vector<std::uint32_t>& sorted_local) {
    std::size_t write = 0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < size(); ++i) {
      if (k < sorted_local.size() && sorted_local[k] == i) {
        ++k;
        continue;
      }
      x[write] = x[i];
      y[write] = y[i];
      z[write] = z[i];
      source[write] = source[i];
      ++write;
    }
    x.resize(write);
    y.resize(write);
    z.resize(write);
    source.resize(write);
  }
};

std::size_t count_inliers(const WorkingSet& w, const Vec3& n, double d, double eps) {
  const double nx = n.x(), ny = n.y(), nz = n.z();
  const double* xs = w.x.data();
  const double* ys = w.y.data();
  const double* zs = w.z.data();
  const std::size_t size = w.size();
  std::size_t count = 0;
  for (std::size_t i = 0; i < size; ++i) {
    const double r = nx * xs[i] + ny * ys[i] + nz * zs[i] + d;
    count += static_cast<std::size_t>(std::abs(r) <= eps);
  }
  return count;
}

std::vector<std::uint32_t> collect_inliers(const WorkingSet& w, const Vec3& n, double d, double eps) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double r = n.x() * w.x[i] + n.y() * w.y[i] + n.z() * w.z[i] + d;
    if (std::abs(r) <= eps) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

std::optional<PlaneEquation> refit(const WorkingSet& w, const std::vector<std::uint32_t>& members) {
  std::vector<Vec3> pts;
  pts.reserve(members.size());
  for (std::uint32_t i : members) pts.push_back(w.at(i));
  return fit_plane_tls(pts);
}

struct CoreFit {
  Vec3 normal;
  double d;
  std::vector<std::uint32_t> local_inliers;  // sorted
  double rms;
};

std::optional<CoreFit> fit_core(const WorkingSet& w, const RansacConfig& config, std::mt19937_64& rng) {
  const std::size_t n = w.size();
  if (n < 3) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  bool found = false;
  std::size_t best_count = 0;
  Vec3 best_normal = Vec3::UnitZ();
  double best_d = 0.0;
  for (int it = 0; it < config.max_iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    std::size_t k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const Vec3 a = w.at(i);
    const Vec3 cross = (w.at(j) - a).cross(w.at(k) - a);
    const double norm = cross.norm();
    if (!(norm > kCollinearTolerance)) continue;
    const Vec3 normal = cross / norm;
    const double d = -normal.dot(a);
    const std::size_t count = count_inliers(w, normal, d, config.epsilon_inlier);
    if (!found || count > best_count) {
      found = true;
      best_count = count;
      best_normal = normal;
      best_d = d;
    }
  }
  if (!found) return std::nullopt;

  std::vector<std::uint32_t> inliers = collect_inliers(w, best_normal, best_d, config.epsilon_inlier);
  Vec3 normal = best_normal;
  double d = best_d;
  for (int round = 0; round < kRefitRounds; ++round) {
    const auto eq = refit(w, inliers);
    if (!eq) break;
    std::vector<std::uint32_t> next = collect_inliers(w, eq->normal, eq->d, config.epsilon_inlier);
    if (static_cast<double>(next.size()) < kRefitRetention * static_cast<double>(inliers.size())) break;
    const bool unchanged = next == inliers;
    normal = eq->normal;
    d = eq->d;
    inliers = std::move(next);
    if (unchanged) break;
  }

  if (d <= 0.0) {
    normal = -normal;
    d = -d;
  }
  double sq = 0.0;
  for (std::uint32_t i : inliers) {
    const double r = normal.dot(w.at(i)) + d;
    sq += r * r;
  }
  const double rms = inliers.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(inliers.size()));
  return CoreFit{normal, d, std::move(inliers), rms};
}

Plane to_plane(const CoreFit& fit, const WorkingSet& w, FrameId frame) {
  Plane plane;
  plane.normal = fit.normal;
  plane.d = fit.d;
  plane.frame_id = frame;
  plane.rms_residual = fit.rms;
  plane.inliers.reserve(fit.local_inliers.size());
  for (std::uint32_t i : fit.local_inliers) plane.inliers.push_back(w.source[i]);
  return plane;
}

}  // namespace

std::optional<Plane> fit_plane_ransac(const PointCloud& cloud, const RansacConfig& config) {
  config.validate();
  const WorkingSet w(cloud);
  std::mt19937_64 rng(config.random_seed);
  const auto fit = fit_core(w, config, rng);
  if (!fit || fit->local_inliers.size() < static_cast<std::size_t>(config.min_inliers)) return std::nullopt;
  return to_plane(*fit, w, cloud.frame_id);
}

std::vector<Plane> extract_planes(const PointCloud& cloud, const RansacConfig& config) {
  config.validate();
  std::vector<Plane> planes;
  WorkingSet w(cloud);
  std::mt19937_64 rng(config.random_seed);
  const auto min_support = static_cast<std::size_t>(config.min_inliers);
  while (static_cast<int>(planes.size()) < config.max_planes && w.size() >= min_support) {
    const auto fit = fit_core(w, config, rng);
    if (!fit || fit->local_inliers.size() < min_support) break;
    planes.push_back(to_plane(*fit, w, cloud.frame_id));
    w.erase(fit->local_inliers);
  }
  std::stable_sort(planes.begin(), planes.end(),
                   [](const Plane& a, const Plane& b) { return a.inliers.size() > b.inliers.size(); });
  return planes;
}

}  // namespace bcomp
