#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pushability/pointcloud.hpp"

namespace pushability {

/// Exact k-d tree over a copy of the input points.
///
/// Both queries use the closed ball (distance <= r) and return indices sorted by
/// ascending squared distance, ties broken by ascending index, so results are
/// identical to a linear scan. Immutable after construction; concurrent queries are safe.
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::span<const Point3> points);
  explicit SpatialIndex(const PointCloud& cloud) : SpatialIndex(std::span<const Point3>(cloud.points)) {}

  std::size_t size() const noexcept { return points_.size(); }

  /// Up to k nearest points within radius r of `query`.
  std::vector<std::size_t> neighbors(const Point3& query, std::size_t k, double r) const;

  /// Every point within radius r of `query`.
  std::vector<std::size_t> radius(const Point3& query, double r) const;

  /// Same set as radius() in unspecified order, written into `out` (cleared first).
  void radius_unordered(const Point3& query, double r, std::vector<std::size_t>& out) const;

  /// Number of points within radius r, stopping early once `limit` is reached.
  std::size_t count_within(const Point3& query, double r,
                           std::size_t limit = static_cast<std::size_t>(-1)) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

}  // namespace pushability
