#pragma once

// Independent oracles and scene builders shared by the unit and acceptance tests.
// Nothing here calls into the code under test except for data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <vector>

#include <Eigen/Core>

#include "pushability/pointcloud.hpp"
#include "pushability/random.hpp"

namespace testing_support {

using pushability::Point3;
using pushability::PointCloud;
using pushability::Rng;
using pushability::Vec3;

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

inline std::vector<Point3> random_points(std::size_t n, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = Point3(rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi));
  return pts;
}

/// Linear scan: indices within r, sorted by (distance, index).
inline std::vector<std::size_t> brute_radius(const std::vector<Point3>& pts, const Point3& q, double r) {
  std::vector<std::pair<double, std::size_t>> hits;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d2 = (pts[i] - q).squaredNorm();
    if (d2 <= r * r) hits.emplace_back(d2, i);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::size_t> out;
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

inline std::vector<std::size_t> brute_knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k, double r) {
  auto all = brute_radius(pts, q, r);
  if (all.size() > k) all.resize(k);
  return all;
}

/// DBSCAN by connected components of the epsilon-graph over core points.
/// Border points join the adjacent component whose smallest core index is lowest;
/// components are numbered by smallest member index.
inline std::vector<int> dbscan_oracle(const std::vector<Point3>& pts, double eps, std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((pts[i] - pts[j]).squaredNorm() <= eps * eps) adj[i].push_back(j);
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = adj[i].size() >= min_pts;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (core[i])
      for (auto j : adj[i])
        if (core[j]) parent[find(i)] = find(j);

  std::vector<std::size_t> min_core(n, n);
  for (std::size_t i = 0; i < n; ++i)
    if (core[i]) min_core[find(i)] = std::min(min_core[find(i)], i);

  // Provisional label: the component key (its smallest core index).
  std::vector<std::size_t> key(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      key[i] = min_core[find(i)];
      continue;
    }
    for (auto j : adj[i])
      if (core[j]) key[i] = std::min(key[i], min_core[find(j)]);
  }

  std::vector<std::size_t> first(n + 1, n);
  for (std::size_t i = 0; i < n; ++i)
    if (key[i] < n) first[key[i]] = std::min(first[key[i]], i);
  std::vector<std::size_t> keys;
  for (std::size_t k = 0; k < n; ++k)
    if (first[k] < n) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
  std::vector<int> id(n + 1, -1);
  for (std::size_t c = 0; c < keys.size(); ++c) id[keys[c]] = static_cast<int>(c);

  std::vector<int> labels(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (key[i] < n) labels[i] = id[key[i]];
  return labels;
}

/// Uniform points on a sphere (normalized Gaussian vectors).
inline std::vector<Point3> sphere_points(std::size_t n, const Point3& center, double radius, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point3> pts;
  pts.reserve(n);
  while (pts.size() < n) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    if (v.norm() < 1e-12) continue;
    pts.push_back(center + radius * v.normalized());
  }
  return pts;
}

inline std::vector<Point3> ellipsoid_points(std::size_t n, const Vec3& axes, std::uint64_t seed) {
  auto pts = sphere_points(n, Point3::Zero(), 1.0, seed);
  for (auto& p : pts) p = p.cwiseProduct(axes);
  return pts;
}

/// Uniform points on the surface of the unit cube [0, 1]^3.
inline std::vector<Point3> cube_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point3> pts(n);
  for (auto& p : pts) {
    const auto face = rng.index(6);
    const double u = rng.uniform(), v = rng.uniform();
    const double w = face % 2 == 0 ? 0.0 : 1.0;
    switch (face / 2) {
      case 0: p = Point3(w, u, v); break;
      case 1: p = Point3(u, w, v); break;
      default: p = Point3(u, v, w); break;
    }
  }
  return pts;
}

/// Jittered grid on the plane z = tan(slope) * (x - x0) + z0 over [x_lo, x_hi] x [y_lo, y_hi].
inline std::vector<Point3> plane_points(double slope, double x0, double z0, double x_lo, double x_hi, double y_lo,
                                        double y_hi, double density, std::uint64_t seed) {
  Rng rng(seed);
  const double step = 1.0 / std::sqrt(density);
  const double t = std::tan(slope);
  std::vector<Point3> pts;
  for (double x = x_lo; x < x_hi; x += step)
    for (double y = y_lo; y < y_hi; y += step) {
      const double xx = x + rng.uniform(-0.3, 0.3) * step;
      const double yy = y + rng.uniform(-0.3, 0.3) * step;
      pts.emplace_back(xx, yy, t * (xx - x0) + z0);
    }
  return pts;
}

inline PointCloud make_cloud(std::vector<Point3> pts) {
  PointCloud c;
  c.points = std::move(pts);
  return c;
}

/// Planar ramp with one square pyramid standing on it, in the robot frame.
///
/// The ramp rises along +x at `slope` over x in [cx - 1, cx + 1], y in [-1, 1]; ground under the
/// pyramid base is left out. The pyramid (base half-width b, height h, faces steeper than 60 deg)
/// has no facet that passes the ground test, so the patch under it holds only ramp points.
/// The whole cloud is shifted so the pyramid's point centroid sits at z = 0, which makes
/// the displacement to the obstacle horizontal.
struct RampScene {
  PointCloud cloud;
  std::size_t obstacle_begin = 0;  // pyramid points are [obstacle_begin, size)
  Vec3 ramp_normal = Vec3::UnitZ();
};

inline RampScene ramp_with_pyramid(double slope, double density, double b, double h, std::uint64_t seed,
                                   double cx = 2.0) {
  const double t = std::tan(slope);
  RampScene s;
  auto pts = plane_points(slope, cx, 0.0, cx - 1.0, cx + 1.0, -1.0, 1.0, density, seed);
  std::erase_if(pts, [&](const Point3& p) { return std::abs(p.x() - cx) < b && std::abs(p.y()) < b; });
  s.obstacle_begin = pts.size();

  Rng rng(seed ^ 0x5bd1e995ULL);
  const double face_area = 4.0 * b * std::hypot(b, h);
  const auto n = static_cast<std::size_t>(std::llround(face_area * density));
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform(-b, b), v = rng.uniform(-b, b);
    const double m = std::max(std::abs(u), std::abs(v));
    pts.emplace_back(cx + u, v, t * u + h * (1.0 - m / b));
  }

  double zc = 0.0;
  for (std::size_t k = s.obstacle_begin; k < pts.size(); ++k) zc += pts[k].z();
  zc /= static_cast<double>(pts.size() - s.obstacle_begin);
  for (auto& p : pts) p.z() -= zc;

  s.cloud = make_cloud(std::move(pts));
  s.ramp_normal = Vec3(-std::sin(slope), 0.0, std::cos(slope));
  return s;
}

}  // namespace testing_support
