#include <doctest.h>

#include <cmath>
#include <set>

#include "pushability/errors.hpp"
#include "pushability/geom.hpp"
#include "support.hpp"

using namespace pushability;
namespace ts = testing_support;

namespace {

NormalField field_of(const std::vector<Vec3>& normals) {
  NormalField f;
  f.normals = normals;
  f.valid.assign(normals.size(), 1);
  return f;
}

// Plane z = 0 over [-2, 2]^2 with a radius-0.4 sphere resting on it at the origin.
// Returns the cloud and the index where sphere points begin.
std::pair<PointCloud, std::size_t> sphere_on_plane(double density, std::uint64_t seed) {
  auto pts = ts::plane_points(0.0, 0.0, 0.0, -2.0, 2.0, -2.0, 2.0, density, seed);
  std::erase_if(pts, [](const Point3& p) { return p.head<2>().norm() < 0.4; });
  const std::size_t first = pts.size();
  const auto sphere = ts::sphere_points(2000, Point3(0, 0, 0.4), 0.4, seed + 1);
  pts.insert(pts.end(), sphere.begin(), sphere.end());
  return {ts::make_cloud(pts), first};
}

}  // namespace

TEST_CASE("normals: plane z = 0") {
  const auto cloud = ts::make_cloud(ts::random_points(200, 0.0, 1.0, 1));
  auto flat = cloud;
  for (auto& p : flat.points) p.z() = 0.0;
  const auto nf = estimate_normals(flat, SpatialIndex(flat), 30, 0.2);
  std::size_t valid = 0;
  for (std::size_t i = 0; i < nf.size(); ++i) {
    if (!nf.is_valid(i)) continue;
    ++valid;
    CHECK((nf.normals[i] - Vec3(0, 0, 1)).norm() < 1e-6);
  }
  CHECK(valid > 150);
}

TEST_CASE("normals: 8 degree plane") {
  auto pts = ts::random_points(200, 0.0, 1.0, 2);
  const double t = std::tan(ts::rad(8.0));
  for (auto& p : pts) p.z() = p.x() * t;
  const auto cloud = ts::make_cloud(pts);
  const auto nf = estimate_normals(cloud, SpatialIndex(cloud), 30, 0.2);
  const Vec3 truth(-std::sin(ts::rad(8.0)), 0.0, std::cos(ts::rad(8.0)));
  std::size_t valid = 0;
  for (std::size_t i = 0; i < nf.size(); ++i) {
    if (!nf.is_valid(i)) continue;
    ++valid;
    CHECK(ts::deg(std::acos(std::min(1.0, std::abs(nf.normals[i].dot(truth))))) < 0.5);
    CHECK(nf.normals[i].z() >= 0.0);
  }
  CHECK(valid > 150);
}

TEST_CASE("normals: isolated point is invalid") {
  const auto cloud = ts::make_cloud({Point3(0, 0, 0), Point3(0.01, 0, 0), Point3(0, 0.01, 0), Point3(0.01, 0.01, 0.001),
                                     Point3(5, 5, 5)});
  const auto nf = estimate_normals(cloud, SpatialIndex(cloud), 30, 0.2);
  CHECK(nf.is_valid(0));
  CHECK_FALSE(nf.is_valid(4));
  CHECK(nf.normals[4] == Vec3::Zero());
  CHECK(nf.valid_count() == 4);
}

TEST_CASE("median normal") {
  CHECK(median_normal(field_of(std::vector<Vec3>(5, Vec3(0, 0, 1)))) == Vec3(0, 0, 1));

  std::vector<Vec3> mostly_up(9, Vec3(0, 0, 1));
  mostly_up.push_back(Vec3(1, 0, 0));
  CHECK((median_normal(field_of(mostly_up)) - Vec3(0, 0, 1)).norm() < 1e-12);

  // Hand-computed component medians: x of {0.6, 0.0, 0.0} is 0, z of {0.8, 1, 1} is 1.
  CHECK((median_normal(field_of({Vec3(0.6, 0, 0.8), Vec3(0, 0, 1), Vec3(0, 0, 1)})) - Vec3(0, 0, 1)).norm() < 1e-12);

  // Even count: mean of the two middle values per component.
  const Vec3 even = median_normal(field_of({Vec3(1, 0, 0), Vec3(0, 0, 1)}));
  CHECK((even - Vec3(1, 0, 1).normalized()).norm() < 1e-12);

  CHECK_THROWS_AS(median_normal(field_of({Vec3(0, 0, 1), Vec3(0, 0, -1)})), DomainError);
  NormalField none;
  none.normals = {Vec3::Zero()};
  none.valid = {0};
  CHECK_THROWS_AS(median_normal(none), DomainError);
}

TEST_CASE("ground test is inclusive and sign-insensitive") {
  const double c = 0.85;
  const Vec3 at(std::sqrt(1 - c * c), 0.0, c);
  auto f = field_of({Vec3(0, 0, 1), at, Vec3(1, 0, 0), Vec3(0, 0, -1), Vec3::Zero()});
  f.valid[4] = 0;
  // The exact boundary vector is rebuilt from its own cosine, so this checks >= and not >.
  const auto ground = segment_ground(f, Vec3(0, 0, 1), at.z());
  CHECK(ground == std::vector<std::size_t>{0, 1, 3, 4});
}

TEST_CASE("ground test on a flat plane keeps every point") {
  const auto cloud = ts::make_cloud(ts::plane_points(0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 2.0, 400, 5));
  const auto seg = segment_scene(cloud);
  CHECK(seg.obstacle_count() == 0);
  CHECK(seg.ground_indices.size() == cloud.size());
  for (int l : seg.labels) CHECK(l == -1);
}

TEST_CASE("ground test on a hemisphere over a plane") {
  const auto [cloud, first] = sphere_on_plane(900, 21);
  const SpatialIndex index(cloud);
  const auto nf = estimate_normals(cloud, index, 30, 0.2);
  const Vec3 n_med = median_normal(nf);
  CHECK(n_med.z() > 0.999);
  const auto ground = segment_ground(nf, n_med, 0.85);
  const std::set<std::size_t> g(ground.begin(), ground.end());

  std::size_t equator = 0, equator_ground = 0, plane_far = 0, plane_far_ground = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    if (i >= first) {
      const Vec3 analytic = (p - Point3(0, 0, 0.4)).normalized();
      // Upper hemisphere band with clearly near-horizontal analytic normals.
      if (p.z() > 0.4 && std::abs(analytic.z()) < 0.6) {
        ++equator;
        equator_ground += g.count(i);
      }
    } else if (p.head<2>().norm() > 0.75) {
      ++plane_far;
      plane_far_ground += g.count(i);
    }
  }
  REQUIRE(equator > 100);
  CHECK(equator_ground == 0);
  CHECK(plane_far_ground == plane_far);
}

TEST_CASE("dbscan: trivial configurations") {
  std::vector<Point3> blobs = ts::random_points(20, 0.0, 0.3, 31);
  const auto far = ts::random_points(20, 10.0, 10.3, 32);
  blobs.insert(blobs.end(), far.begin(), far.end());
  const auto labels = dbscan(blobs, 0.5, 5);
  for (std::size_t i = 0; i < 20; ++i) CHECK(labels[i] == 0);
  for (std::size_t i = 20; i < 40; ++i) CHECK(labels[i] == 1);

  const std::vector<Point3> sparse{Point3(0, 0, 0), Point3(3, 0, 0), Point3(6, 0, 0)};
  CHECK(dbscan(sparse, 0.5, 5) == std::vector<int>{-1, -1, -1});
  CHECK(dbscan(std::vector<Point3>{}, 0.5, 5).empty());
  CHECK_THROWS_AS(dbscan(sparse, 0.0, 5), DomainError);
  CHECK_THROWS_AS(dbscan(sparse, 0.5, 0), DomainError);
}

TEST_CASE("dbscan: border point joins the cluster with the lowest core") {
  // Two groups on the x axis; the last point at x = 0 sees one point of each and is not core.
  const std::vector<double> xs{0.4, 0.5, 0.55, 0.6, 0.65, 0.7};
  std::vector<Point3> pts;
  for (double x : xs) pts.emplace_back(-x, 0, 0);  // indices 0..5
  for (double x : xs) pts.emplace_back(x, 0, 0);   // indices 6..11
  pts.emplace_back(0, 0, 0);                       // index 12
  const auto labels = dbscan(pts, 0.45, 6);
  CHECK(labels == ts::dbscan_oracle(pts, 0.45, 6));
  CHECK(labels[0] == 0);
  CHECK(labels[6] == 1);
  CHECK(labels[12] == 0);
}

TEST_CASE("dbscan: matches the epsilon-graph oracle on 300 random points") {
  const auto pts = ts::random_points(300, 0.0, 4.0, 41);
  CHECK(dbscan(pts, 0.5, 5) == ts::dbscan_oracle(pts, 0.5, 5));
}

TEST_CASE("segment_scene: sphere on a plane is one cluster of sphere points") {
  const auto [cloud, first] = sphere_on_plane(900, 51);
  const auto seg = segment_scene(cloud);
  REQUIRE(seg.obstacle_count() == 1);
  for (auto i : seg.clusters[0]) CHECK(i >= first);
  // Points above the ground contact band belong to the cluster (the top cap is ground-like).
  std::size_t band = 0, band_hit = 0;
  std::set<std::size_t> members(seg.clusters[0].begin(), seg.clusters[0].end());
  for (std::size_t i = first; i < cloud.size(); ++i) {
    const double nz = (cloud[i] - Point3(0, 0, 0.4)).normalized().z();
    if (std::abs(nz) < 0.6) {
      ++band;
      band_hit += members.count(i);
    }
  }
  CHECK(band_hit >= 0.95 * band);
  // Labels and index lists agree and partition the cloud.
  CHECK(seg.ground_indices.size() + seg.clusters[0].size() == cloud.size());
  for (auto i : seg.clusters[0]) CHECK(seg.labels[i] == 0);
  for (auto i : seg.ground_indices) CHECK(seg.labels[i] == -1);
}

TEST_CASE("segment_scene: two rocks 5 m apart give two clusters") {
  auto pts = ts::plane_points(0.0, 0.0, 0.0, -1.0, 7.0, -1.5, 1.5, 600, 61);
  std::erase_if(pts, [](const Point3& p) {
    return (p.head<2>() - Eigen::Vector2d(0.5, 0)).norm() < 0.3 || (p.head<2>() - Eigen::Vector2d(5.5, 0)).norm() < 0.3;
  });
  for (const auto& c : {Point3(0.5, 0, 0.3), Point3(5.5, 0, 0.3)}) {
    const auto s = ts::sphere_points(800, c, 0.3, 62);
    pts.insert(pts.end(), s.begin(), s.end());
  }
  const auto seg = segment_scene(ts::make_cloud(pts));
  CHECK(seg.obstacle_count() == 2);
  CHECK_THROWS_AS(segment_scene(PointCloud{}), DomainError);
}
