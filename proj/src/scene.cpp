#include <algorithm>
#include <cmath>

#include "pushability/errors.hpp"
#include "pushability/synth.hpp"

namespace pushability::synth {
namespace {

double cross2(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Counter-clockwise hull of the rock's xy projection (monotone chain).
struct Footprint {
  std::vector<Eigen::Vector2d> hull;
  Eigen::Vector2d lo, hi;

  explicit Footprint(const PointCloud& cloud) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(cloud.size());
    for (const auto& p : cloud.points) pts.emplace_back(p.x(), p.y());
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    hull.resize(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
      while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
      hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    lo = hi = hull.empty() ? Eigen::Vector2d::Zero() : hull.front();
    for (const auto& p : hull) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  }

  bool covers(const Eigen::Vector2d& q) const {
    if (hull.size() < 3) return false;
    if ((q.array() < lo.array()).any() || (q.array() > hi.array()).any()) return false;
    for (std::size_t i = 0; i < hull.size(); ++i) {
      if (cross2(hull[i], hull[(i + 1) % hull.size()], q) < 0.0) return false;
    }
    return true;
  }
};

}  // namespace

SceneSample sample_scene(const HeightMap& terrain, const std::vector<PlacedRock>& rocks, const ViewParams& view,
                         std::uint64_t seed) {
  if (!(view.ground_density > 0.0)) throw DomainError("sample_scene: ground density must be positive");
  if (!(view.window_far > view.window_near) || !(view.window_half_width > 0.0)) {
    throw DomainError("sample_scene: empty sampling window");
  }
  const Eigen::Vector2d& robot = view.robot_xy;
  if (!terrain.contains(robot.x(), robot.y())) throw DomainError("sample_scene: robot is off the terrain");
  const double origin_z = terrain.height(robot.x(), robot.y()) + view.base_height;
  const double c = std::cos(view.heading);
  const double s = std::sin(view.heading);
  auto to_world = [&](const Eigen::Vector2d& q) { return Eigen::Vector2d(robot.x() + c * q.x() - s * q.y(), robot.y() + s * q.x() + c * q.y()); };
  auto to_robot = [&](const Point3& p) {
    const double dx = p.x() - robot.x();
    const double dy = p.y() - robot.y();
    return Point3(c * dx + s * dy, -s * dx + c * dy, p.z() - origin_z);
  };

  std::vector<Footprint> footprints;
  if (view.hide_covered_ground) {
    for (const auto& r : rocks) footprints.emplace_back(r.surface.cloud);
  }

  SceneSample out;
  out.cloud.frame_id = "robot";
  Rng rng(seed);
  const double step = 1.0 / std::sqrt(view.ground_density);
  const auto nx = static_cast<std::size_t>(std::floor((view.window_far - view.window_near) / step));
  const auto ny = static_cast<std::size_t>(std::floor(2.0 * view.window_half_width / step));
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double jx = rng.uniform(-0.3, 0.3);
      const double jy = rng.uniform(-0.3, 0.3);
      const Eigen::Vector2d local(view.window_near + (static_cast<double>(i) + 0.5 + jx) * step,
                                  -view.window_half_width + (static_cast<double>(j) + 0.5 + jy) * step);
      const Eigen::Vector2d w = to_world(local);
      if (!terrain.contains(w.x(), w.y())) throw DomainError("sample_scene: sampling window leaves the terrain");
      bool covered = false;
      for (const auto& f : footprints) covered = covered || f.covers(w);
      if (covered) continue;
      out.cloud.points.emplace_back(local.x(), local.y(), terrain.height(w.x(), w.y()) - origin_z);
      out.labels.push_back(-1);
    }
  }
  out.ground_count = out.cloud.size();

  const Point3 sensor(robot.x(), robot.y(), origin_z + view.sensor_height);
  for (std::size_t r = 0; r < rocks.size(); ++r) {
    const auto& surface = rocks[r].surface;
    std::size_t kept = 0;
    for (std::size_t k = 0; k < surface.cloud.size(); ++k) {
      const Point3& p = surface.cloud.points[k];
      if (view.visibility) {
        const double facing = surface.normals[k].dot((sensor - p).normalized());
        if (!(rng.uniform() < facing)) continue;
      }
      out.cloud.points.push_back(to_robot(p));
      out.labels.push_back(static_cast<int>(r));
      ++kept;
    }
    out.rock_counts.push_back(kept);
  }
  return out;
}

}  // namespace pushability::synth
