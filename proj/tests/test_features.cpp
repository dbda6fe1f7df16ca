#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "pushability/errors.hpp"
#include "pushability/features.hpp"
#include "support.hpp"

using namespace pushability;
namespace ts = testing_support;

namespace {

Eigen::Matrix3d some_rotation(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Vec3::UnitZ()) * Eigen::AngleAxisd(b, Vec3::UnitY()) *
          Eigen::AngleAxisd(c, Vec3::UnitX()))
      .toRotationMatrix();
}

bool same_box(const Aabb& a, const Point3& lo, const Point3& hi) {
  return (a.min_corner - lo).norm() < 1e-12 && (a.max_corner - hi).norm() < 1e-12;
}

}  // namespace

TEST_CASE("aabb") {
  std::vector<Point3> corners;
  for (int i = 0; i < 8; ++i) corners.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  const Aabb unit = compute_aabb(corners);
  CHECK(same_box(unit, Point3::Zero(), Point3::Ones()));
  CHECK(unit.volume() == doctest::Approx(1.0));

  const std::vector<Point3> one{Point3(1, 2, 3)};
  CHECK(compute_aabb(one).volume() == 0.0);
  CHECK_THROWS_AS(compute_aabb(std::vector<Point3>{}), DomainError);

  const auto pts = ts::random_points(100, -3.0, 3.0, 7);
  Point3 lo = pts[0], hi = pts[0];
  for (const auto& p : pts)
    for (int c = 0; c < 3; ++c) {
      lo[c] = std::min(lo[c], p[c]);
      hi[c] = std::max(hi[c], p[c]);
    }
  CHECK(same_box(compute_aabb(pts), lo, hi));
}

TEST_CASE("scale_box") {
  CHECK(same_box(scale_box(Aabb{Point3(-1, -1, -1), Point3(1, 1, 1)}, 1.5), Point3::Constant(-1.5),
                 Point3::Constant(1.5)));
  const Aabb b{Point3(0.2, -1, 3), Point3(0.7, 2, 4)};
  CHECK(same_box(scale_box(b, 1.0), b.min_corner, b.max_corner));
  CHECK(same_box(scale_box(Aabb{Point3::Zero(), Point3::Constant(2)}, 1.5), Point3::Constant(-0.5),
                 Point3::Constant(2.5)));
  CHECK_THROWS_AS(scale_box(b, 0.5), DomainError);
}

TEST_CASE("ellipsoid fit: exact quadrics have zero residual") {
  CHECK(fit_ellipsoid(ts::sphere_points(500, Point3(0.3, -2, 1), 1.0, 3)).shape < 1e-6);
  CHECK(fit_ellipsoid(ts::ellipsoid_points(500, Vec3(2, 1, 0.5), 4)).shape < 1e-6);
}

TEST_CASE("ellipsoid fit: cube is more angular than sphere") {
  const double sphere = fit_ellipsoid(ts::sphere_points(500, Point3::Zero(), 1.0, 5)).shape;
  const double cube = fit_ellipsoid(ts::cube_points(500, 6)).shape;
  CHECK(cube > sphere);
  CHECK(cube > 1e-3);
}

TEST_CASE("ellipsoid fit: residual is invariant to rigid motion and scale") {
  const auto cube = ts::cube_points(500, 8);
  const double base = fit_ellipsoid(cube).shape;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::Matrix3d R = some_rotation(0.3 + trial, 1.1 * trial, -0.7 * trial);
    const Vec3 t(5.0 * trial, -3.0, 0.5 * trial);
    const double s = 0.5 + trial;
    std::vector<Point3> moved;
    for (const auto& p : cube) moved.push_back(s * (R * p) + t);
    CHECK(std::abs(fit_ellipsoid(moved).shape - base) < 1e-6);
  }
}

TEST_CASE("ellipsoid fit: degenerate inputs") {
  CHECK_THROWS_AS(fit_ellipsoid(ts::random_points(9, 0, 1, 1)), DegenerateShapeError);
  auto flat = ts::random_points(100, 0, 1, 2);
  for (auto& p : flat) p.z() = 0.0;
  CHECK_THROWS_AS(fit_ellipsoid(flat), DegenerateShapeError);
  CHECK_THROWS_AS(fit_ellipsoid(std::vector<Point3>(20, Point3(1, 1, 1))), DegenerateShapeError);
}

TEST_CASE("theta") {
  CHECK(compute_theta(Point3(2, 0, 0), Vec3(0, 0, 1)) == doctest::Approx(std::numbers::pi / 2));
  // On a downhill the ground falls away from the robot, so its normal leans away (+x) and
  // theta drops below the flat value; an uphill normal leans back and raises it.
  const double phi = ts::rad(8.0);
  const Vec3 tilted(-std::sin(phi), 0.0, std::cos(phi));
  const Vec3 downhill(std::sin(phi), 0.0, std::cos(phi));
  const Point3 ahead(2, 0, -0.3);
  CHECK(compute_theta(ahead, downhill) < compute_theta(ahead, Vec3(0, 0, 1)));
  CHECK(compute_theta(ahead, Vec3(0, 0, 1)) < compute_theta(ahead, tilted));
  CHECK(compute_theta(ahead, Vec3(std::sin(ts::rad(15.0)), 0.0, std::cos(ts::rad(15.0)))) < std::numbers::pi / 2);
  CHECK(compute_theta(Point3(2, 0, 0), downhill) == doctest::Approx(std::numbers::pi / 2 - phi));
  CHECK(compute_theta(Point3(2, 0, 0), Vec3(2, 0, 0)) == doctest::Approx(0.0));
  // Sign of the normal does not matter.
  CHECK(compute_theta(Point3(1, 2, 0.5), tilted) == doctest::Approx(compute_theta(Point3(1, 2, 0.5), -tilted)));
  CHECK_THROWS_AS(compute_theta(Point3::Zero(), Vec3(0, 0, 1)), DomainError);
  CHECK_THROWS_AS(compute_theta(Point3(1, 0, 0), Vec3::Zero()), DomainError);
}

TEST_CASE("surface patch: sphere on a flat plane") {
  auto pts = ts::plane_points(0.0, 2.0, 0.0, 1.0, 3.0, -1.0, 1.0, 900, 9);
  std::erase_if(pts, [](const Point3& p) { return (p.head<2>() - Eigen::Vector2d(2, 0)).norm() < 0.3; });
  const std::size_t first = pts.size();
  const auto sphere = ts::sphere_points(1500, Point3(2, 0, 0.3), 0.3, 10);
  pts.insert(pts.end(), sphere.begin(), sphere.end());
  const auto cloud = ts::make_cloud(pts);

  NormalField nf;
  Vec3 gn;
  const auto seg = segment_scene(cloud, {}, nf, gn);
  REQUIRE(seg.obstacle_count() == 1);
  const Aabb box = scale_box(compute_aabb(gather(cloud, seg.clusters[0])), 1.5);
  const auto patch = surface_patch(seg, cloud, nf, 0, 1.5);

  std::size_t plane_hits = 0;
  for (std::size_t k = 0; k < patch.indices.size(); ++k) {
    const auto i = patch.indices[k];
    const Point3& p = cloud[i];
    CHECK(p.x() >= box.min_corner.x());
    CHECK(p.x() <= box.max_corner.x());
    CHECK(p.y() >= box.min_corner.y());
    CHECK(p.y() <= box.max_corner.y());
    if (i < first) {
      ++plane_hits;
      // Plane points away from the contact ring see only the plane.
      if ((p.head<2>() - Eigen::Vector2d(2, 0)).norm() > 0.45) CHECK(patch.normals[k].z() > 1.0 - 1e-9);
    }
  }
  CHECK(plane_hits > 100);

  // Every plane point inside the scaled footprint is in the patch.
  std::size_t inside = 0;
  for (std::size_t i = 0; i < first; ++i) {
    const Point3& p = cloud[i];
    if (p.x() >= box.min_corner.x() && p.x() <= box.max_corner.x() && p.y() >= box.min_corner.y() &&
        p.y() <= box.max_corner.y() && p.z() >= box.min_corner.z())
      ++inside;
  }
  CHECK(plane_hits == inside);
}

TEST_CASE("surface patch: nothing under an unscaled footprint") {
  // A ring of ground around a removed square, and an open vertical cylinder standing in the hole.
  // The cylinder has no facet that passes the ground test.
  auto pts = ts::plane_points(0.0, 0.0, 0.0, -1.0, 1.0, -1.0, 1.0, 900, 12);
  std::erase_if(pts, [](const Point3& p) { return std::abs(p.x()) < 0.35 && std::abs(p.y()) < 0.35; });
  const std::size_t first = pts.size();
  Rng rng(13);
  for (int k = 0; k < 1200; ++k) {
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    pts.emplace_back(0.25 * std::cos(a), 0.25 * std::sin(a), rng.uniform(0.05, 0.45));
  }
  const auto cloud = ts::make_cloud(pts);
  NormalField nf;
  Vec3 gn;
  auto seg = segment_scene(cloud, {}, nf, gn);
  REQUIRE(seg.obstacle_count() == 1);
  CHECK(seg.clusters[0].front() >= first);
  CHECK_THROWS_AS(surface_patch(seg, cloud, nf, 0, 1.0), EmptyPatchError);
  CHECK_THROWS_AS(surface_patch(seg, cloud, nf, 5, 1.5), DomainError);
  const auto f = extract_features(seg, cloud, nf, 1.0);
  CHECK(f[0].has(kFlagEmptyPatch));
  CHECK(f[0].mean_normal == Vec3::UnitZ());
}

TEST_CASE("surface patch: 8 degree ramp") {
  const auto scene = ts::ramp_with_pyramid(ts::rad(8.0), 3000, 0.3, 0.6, 14);
  NormalField nf;
  Vec3 gn;
  const auto seg = segment_scene(scene.cloud, {}, nf, gn);
  REQUIRE(seg.obstacle_count() == 1);
  const auto f = extract_features(seg, scene.cloud, nf);
  const double err = ts::deg(std::acos(std::min(1.0, f[0].mean_normal.dot(scene.ramp_normal))));
  CHECK(err < 1.0);
}

TEST_CASE("extract_features: volumes follow size") {
  auto pts = ts::plane_points(0.0, 0.0, 0.0, 0.0, 6.0, -1.5, 1.5, 600, 15);
  std::erase_if(pts, [](const Point3& p) {
    return (p.head<2>() - Eigen::Vector2d(1.5, 0)).norm() < 0.25 || (p.head<2>() - Eigen::Vector2d(4.5, 0)).norm() < 0.5;
  });
  const auto small = ts::sphere_points(1500, Point3(1.5, 0, 0.25), 0.25, 16);
  const auto large = ts::sphere_points(3000, Point3(4.5, 0, 0.5), 0.5, 17);
  pts.insert(pts.end(), small.begin(), small.end());
  pts.insert(pts.end(), large.begin(), large.end());
  const auto cloud = ts::make_cloud(pts);
  NormalField nf;
  Vec3 gn;
  const auto seg = segment_scene(cloud, {}, nf, gn);
  REQUIRE(seg.obstacle_count() == 2);
  const auto f = extract_features(seg, cloud, nf);
  const auto& near = f[0].centroid.x() < f[1].centroid.x() ? f[0] : f[1];
  const auto& far = f[0].centroid.x() < f[1].centroid.x() ? f[1] : f[0];
  CHECK(far.volume > near.volume);
  // Sphere of radius 0.25: AABB volume near 0.5^3, minus the cap lost to the ground test.
  CHECK(std::abs(near.volume - 0.125) < 0.15 * 0.125);
  CHECK(near.shape < far.shape + 1.0);  // both are smooth
  CHECK(near.theta >= 0.0);
  CHECK(near.theta <= std::numbers::pi);
}

TEST_CASE("extract_features: no obstacles") {
  const auto cloud = ts::make_cloud(ts::plane_points(0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 2.0, 400, 18));
  NormalField nf;
  Vec3 gn;
  const auto seg = segment_scene(cloud, {}, nf, gn);
  CHECK(extract_features(seg, cloud, nf).empty());
}

TEST_CASE("obstacle features json round trip") {
  ObstacleFeatures f;
  f.cluster = 3;
  f.point_count = 42;
  f.centroid = Point3(1.5, -0.25, 0.125);
  f.box_dims = Vec3(0.5, 0.25, 0.75);
  f.volume = 0.09375;
  f.shape = 0.01;
  f.mean_normal = Vec3(0, 0.6, 0.8);
  f.theta = 1.2;
  f.surface_point_count = 17;
  f.flags = kFlagEmptyPatch | kFlagDegenerateShape;
  const auto j = to_json(f);
  for (const char* key : {"centroid", "box_dims", "volume", "shape", "mean_normal", "theta", "surface_count", "flags"})
    CHECK(j.contains(key));
  const auto back = obstacle_features_from_json(j);
  CHECK(back.centroid == f.centroid);
  CHECK(back.mean_normal == f.mean_normal);
  CHECK(back.flags == f.flags);
  CHECK(back.surface_point_count == 17);
  CHECK_THROWS_AS(obstacle_features_from_json(nlohmann::json{{"centroid", 3}}), ParseError);
}
