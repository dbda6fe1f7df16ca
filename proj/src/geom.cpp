#include "pushability/geom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "pushability/errors.hpp"

namespace pushability {

NormalField estimate_normals(const PointCloud& cloud, const SpatialIndex& index, std::size_t k, double r) {
  if (k < 3) throw DomainError("estimate_normals: k must be at least 3");
  const std::size_t n = cloud.size();
  NormalField field;
  field.normals.assign(n, Vec3::Zero());
  field.valid.assign(n, 0);

  std::vector<std::size_t> nbrs;
  for (std::size_t i = 0; i < n; ++i) {
    nbrs = index.neighbors(cloud.points[i], k, r);
    if (nbrs.size() < 3) continue;

    Vec3 centroid = Vec3::Zero();
    for (auto q : nbrs) centroid += cloud.points[q];
    centroid /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (auto q : nbrs) {
      const Vec3 d = cloud.points[q] - centroid;
      cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const Vec3 normal = eig.eigenvectors().col(0);
    const double len = normal.norm();
    if (!(len > 0.0) || !normal.allFinite()) continue;
    field.normals[i] = canonical_sign(normal / len);
    field.valid[i] = 1;
  }
  return field;
}

Vec3 median_normal(const NormalField& field) {
  std::array<std::vector<double>, 3> comps;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!field.is_valid(i)) continue;
    for (int c = 0; c < 3; ++c) comps[c].push_back(field.normals[i][c]);
  }
  if (comps[0].empty()) throw DomainError("median_normal: no valid normals");

  Vec3 med;
  for (int c = 0; c < 3; ++c) {
    auto& v = comps[c];
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double value = v[m];
    if (v.size() % 2 == 0) {
      const double lower = *std::max_element(v.begin(), v.begin() + m);
      value = 0.5 * (lower + value);
    }
    med[c] = value;
  }
  const double len = med.norm();
  if (!(len > 1e-12)) throw DomainError("median_normal: component-wise median has zero length");
  return canonical_sign(med / len);
}

std::vector<std::size_t> segment_ground(const NormalField& field, const Vec3& n_med, double t_cs) {
  if (!(t_cs > 0.0 && t_cs <= 1.0)) throw DomainError("segment_ground: threshold must be in (0, 1]");
  std::vector<std::size_t> ground;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (!field.is_valid(i) || std::abs(n_med.dot(field.normals[i])) >= t_cs) ground.push_back(i);
  }
  return ground;
}

std::vector<int> dbscan(std::span<const Point3> points, double epsilon, std::size_t min_pts) {
  if (!(epsilon > 0.0)) throw DomainError("dbscan: epsilon must be positive");
  if (min_pts < 1) throw DomainError("dbscan: min_pts must be at least 1");
  const std::size_t n = points.size();
  std::vector<int> labels(n, -1);
  if (n == 0) return labels;

  const SpatialIndex index(points);
  std::vector<std::uint8_t> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) core[i] = index.count_within(points[i], epsilon, min_pts) >= min_pts ? 1 : 0;

  // Expand clusters from core points in index order; a border point keeps the
  // first cluster that reaches it.
  int next = 0;
  std::deque<std::size_t> frontier;
  std::vector<std::size_t> found;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || labels[seed] >= 0) continue;
    const int id = next++;
    labels[seed] = id;
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      index.radius_unordered(points[p], epsilon, found);
      for (std::size_t q : found) {
        if (labels[q] >= 0) continue;
        labels[q] = id;
        if (core[q]) frontier.push_back(q);
      }
    }
  }

  // Renumber by smallest member index (a border point may precede its cluster's first core).
  std::vector<std::size_t> first(next, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= 0) first[labels[i]] = std::min(first[labels[i]], i);
  }
  std::vector<int> order(next);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return first[a] < first[b]; });
  std::vector<int> remap(next);
  for (int j = 0; j < next; ++j) remap[order[j]] = j;
  for (auto& l : labels) {
    if (l >= 0) l = remap[l];
  }
  return labels;
}

SceneSegmentation segment_scene(const PointCloud& cloud, const SegmentationParams& params, NormalField& normals,
                                Vec3& ground_normal) {
  if (cloud.empty()) throw DomainError("segment_scene: empty cloud");
  const SpatialIndex index(cloud);
  normals = estimate_normals(cloud, index, params.k, params.radius);
  ground_normal = median_normal(normals);
  const std::vector<std::size_t> ground = segment_ground(normals, ground_normal, params.t_cs);

  std::vector<std::uint8_t> is_ground(cloud.size(), 0);
  for (auto i : ground) is_ground[i] = 1;
  std::vector<std::size_t> rest;
  std::vector<Point3> rest_points;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (is_ground[i]) continue;
    rest.push_back(i);
    rest_points.push_back(cloud.points[i]);
  }
  const std::vector<int> cluster_of = dbscan(rest_points, params.epsilon, params.min_pts);

  SceneSegmentation seg;
  seg.labels.assign(cloud.size(), -1);
  int m = 0;
  for (int l : cluster_of) m = std::max(m, l + 1);
  seg.clusters.resize(m);
  for (std::size_t j = 0; j < rest.size(); ++j) {
    if (cluster_of[j] < 0) continue;
    seg.labels[rest[j]] = cluster_of[j];
    seg.clusters[cluster_of[j]].push_back(rest[j]);
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (seg.labels[i] < 0) seg.ground_indices.push_back(i);
  }
  return seg;
}

SceneSegmentation segment_scene(const PointCloud& cloud, const SegmentationParams& params) {
  NormalField normals;
  Vec3 ground_normal;
  return segment_scene(cloud, params, normals, ground_normal);
}

}  // namespace pushability
