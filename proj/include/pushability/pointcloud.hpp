#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pushability {

/// Position in meters; robot/sensor frame with z up, x forward.
using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;

/// Ordered point set. Indices are stable identifiers for every downstream mask or label.
struct PointCloud {
  std::vector<Point3> points;
  std::string frame_id = "robot";

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }
};

/// Per-point unit normals parallel to a PointCloud. Invalid slots hold a zero vector.
struct NormalField {
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> valid;

  std::size_t size() const noexcept { return normals.size(); }
  bool is_valid(std::size_t i) const { return valid[i] != 0; }
  std::size_t valid_count() const;
};

/// Flip a unit vector so z >= 0; when |z| < 1e-9 fall back to x >= 0, then y >= 0.
Vec3 canonical_sign(const Vec3& n);

/// Gather a subset of points by index.
std::vector<Point3> gather(const PointCloud& cloud, const std::vector<std::size_t>& indices);

}  // namespace pushability
