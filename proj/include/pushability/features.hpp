#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pushability/geom.hpp"
#include "pushability/pointcloud.hpp"

namespace pushability {

/// Shape score assigned when the quadric fit is degenerate.
inline constexpr double kShapeMax = 10.0;
/// Lower bound applied to the shape score wherever it is used as a divisor.
inline constexpr double kShapeFloor = 1e-3;

struct Aabb {
  Point3 min_corner = Point3::Zero();
  Point3 max_corner = Point3::Zero();

  Vec3 dims() const { return max_corner - min_corner; }
  Point3 center() const { return 0.5 * (min_corner + max_corner); }
  double volume() const {
    const Vec3 d = dims();
    return d.x() * d.y() * d.z();
  }
};

/// Component-wise min/max; throws DomainError on an empty set.
Aabb compute_aabb(std::span<const Point3> points);

/// Scales every half-extent by s about the box center (s >= 1).
Aabb scale_box(const Aabb& box, double s = 1.5);

struct EllipsoidFit {
  /// Quadric coefficients a..j of ax²+by²+cz²+dxy+exz+fyz+gx+hy+iz+j over the
  /// centered, mean-radius-normalized points.
  Eigen::Matrix<double, 10, 1> coefficients;
  /// RMS algebraic residual.
  double shape = 0.0;
};

/// Least-squares quadric fit by algebraic distance.
///
/// Points are centered on their centroid and divided by their mean distance to it.
/// The cross terms are weighted by sqrt(2) inside the solve so that the unit-norm
/// gauge equals the Frobenius norm of the quadric's matrix, which makes the residual
/// invariant to rotation as well as translation and scale. The solution is the right
/// singular vector of the design matrix with the smallest singular value.
/// Throws DegenerateShapeError for fewer than 10 points or a null space of dimension > 1.
EllipsoidFit fit_ellipsoid(std::span<const Point3> points);

struct SurfacePatch {
  std::vector<std::size_t> indices;  // ground points under the scaled footprint
  std::vector<Vec3> normals;         // their (valid, upward) normals
};

/// Ground points with valid normals inside the s-scaled box footprint and at or above
/// the scaled box floor. Throws EmptyPatchError when nothing qualifies.
SurfacePatch surface_patch(const SceneSegmentation& seg, const PointCloud& cloud, const NormalField& normals,
                           std::size_t obstacle, double s = 1.5);

/// Angle in [0, pi] between the displacement to the obstacle and the upward-oriented
/// mean surface normal. Throws DomainError on zero-length inputs.
double compute_theta(const Point3& centroid, const Vec3& mean_normal);

enum FeatureFlag : unsigned {
  kFlagNone = 0,
  kFlagDegenerateShape = 1u << 0,
  kFlagEmptyPatch = 1u << 1,
  kFlagZeroVolume = 1u << 2,
  kFlagDegenerateTheta = 1u << 3,
};

struct ObstacleFeatures {
  std::size_t cluster = 0;
  std::size_t point_count = 0;
  Point3 centroid = Point3::Zero();
  Vec3 box_dims = Vec3::Zero();
  double volume = 0.0;
  double shape = 0.0;
  Vec3 mean_normal = Vec3::UnitZ();
  double theta = 0.0;
  std::size_t surface_point_count = 0;
  unsigned flags = kFlagNone;

  const Point3& position() const { return centroid; }
  bool has(FeatureFlag f) const { return (flags & f) != 0; }
  /// Any flag that makes the obstacle unclassifiable.
  bool flagged() const { return flags != kFlagNone; }
};

/// One record per cluster. Degenerate fits get shape = kShapeMax; an empty patch keeps
/// the mean normal at +z and sets kFlagEmptyPatch.
std::vector<ObstacleFeatures> extract_features(const SceneSegmentation& seg, const PointCloud& cloud,
                                               const NormalField& normals, double s = 1.5);

std::vector<std::string> flag_names(unsigned flags);

nlohmann::json to_json(const ObstacleFeatures& f);
ObstacleFeatures obstacle_features_from_json(const nlohmann::json& j);

}  // namespace pushability
