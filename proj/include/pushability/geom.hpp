#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pushability/pointcloud.hpp"
#include "pushability/spatial_index.hpp"

namespace pushability {

/// Disjoint ground/obstacle partition of a cloud.
struct SceneSegmentation {
  std::vector<std::size_t> ground_indices;         // sorted
  std::vector<std::vector<std::size_t>> clusters;  // each sorted; ordered by smallest member
  std::vector<int> labels;                         // -1 ground, j >= 0 cluster j

  std::size_t obstacle_count() const noexcept { return clusters.size(); }
};

struct SegmentationParams {
  std::size_t k = 30;      // neighbors for normal estimation
  double radius = 0.2;     // neighbor search radius [m]
  double t_cs = 0.85;      // cosine similarity threshold
  double epsilon = 0.5;    // DBSCAN neighborhood radius [m]
  std::size_t min_pts = 5; // DBSCAN minimum points (self included)
};

/// Smallest-eigenvalue eigenvector of the neighborhood covariance for every point
/// with at least 3 neighbors among its k nearest within r; sign via canonical_sign().
NormalField estimate_normals(const PointCloud& cloud, const SpatialIndex& index, std::size_t k = 30,
                             double r = 0.2);

/// Component-wise median of the valid normals, renormalized and sign-canonicalized.
/// Throws DomainError when there is no valid normal or the median has zero length.
Vec3 median_normal(const NormalField& field);

/// Indices with |cos(n_med, n_i)| >= t_cs, plus every index whose normal is invalid.
std::vector<std::size_t> segment_ground(const NormalField& field, const Vec3& n_med, double t_cs = 0.85);

/// DBSCAN over the given points. Returns -1 for noise and 0..m-1 for clusters,
/// numbered by ascending smallest member index. A border point reachable from
/// several clusters joins the one whose smallest core index is lowest.
std::vector<int> dbscan(std::span<const Point3> points, double epsilon = 0.5, std::size_t min_pts = 5);

/// Normals, median ground normal, ground test, then DBSCAN on the remainder.
/// DBSCAN noise is returned to the ground set.
SceneSegmentation segment_scene(const PointCloud& cloud, const SegmentationParams& params = {});

/// Same as above, also handing back the intermediate normals and ground normal.
SceneSegmentation segment_scene(const PointCloud& cloud, const SegmentationParams& params, NormalField& normals,
                                Vec3& ground_normal);

}  // namespace pushability
