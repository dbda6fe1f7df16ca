#include "pushability/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "pushability/errors.hpp"

namespace pushability {

Aabb compute_aabb(std::span<const Point3> points) {
  if (points.empty()) throw DomainError("compute_aabb: empty point set");
  Aabb box{points.front(), points.front()};
  for (const Point3& p : points) {
    box.min_corner = box.min_corner.cwiseMin(p);
    box.max_corner = box.max_corner.cwiseMax(p);
  }
  return box;
}

Aabb scale_box(const Aabb& box, double s) {
  if (!(s >= 1.0)) throw DomainError("scale_box: scale factor must be >= 1");
  const Point3 c = box.center();
  const Vec3 half = 0.5 * s * box.dims();
  return Aabb{c - half, c + half};
}

EllipsoidFit fit_ellipsoid(std::span<const Point3> points) {
  const std::size_t n = points.size();
  if (n < 10) throw DegenerateShapeError("fit_ellipsoid: need at least 10 points");

  Point3 c = Point3::Zero();
  for (const Point3& p : points) c += p;
  c /= static_cast<double>(n);
  double scale = 0.0;
  for (const Point3& p : points) scale += (p - c).norm();
  scale /= static_cast<double>(n);
  if (!(scale > 1e-12)) throw DegenerateShapeError("fit_ellipsoid: points coincide");

  const double r2 = std::numbers::sqrt2;
  Eigen::MatrixXd design(n, 10);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 q = (points[i] - c) / scale;
    const double x = q.x(), y = q.y(), z = q.z();
    design.row(static_cast<Eigen::Index>(i)) << x * x, y * y, z * z, r2 * x * y, r2 * x * z, r2 * y * z, x, y, z, 1.0;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[8] <= 1e-10 * sv[0]) {
    throw DegenerateShapeError("fit_ellipsoid: rank-deficient design matrix (coplanar or collinear points)");
  }
  const Eigen::Matrix<double, 10, 1> v = svd.matrixV().col(9);

  EllipsoidFit fit;
  fit.shape = (design * v).norm() / std::sqrt(static_cast<double>(n));
  fit.coefficients = v;
  fit.coefficients.segment<3>(3) *= r2;
  return fit;
}

SurfacePatch surface_patch(const SceneSegmentation& seg, const PointCloud& cloud, const NormalField& normals,
                           std::size_t obstacle, double s) {
  if (obstacle >= seg.clusters.size()) throw DomainError("surface_patch: no such obstacle");
  const Aabb box = scale_box(compute_aabb(gather(cloud, seg.clusters[obstacle])), s);

  SurfacePatch patch;
  for (std::size_t i : seg.ground_indices) {
    if (!normals.is_valid(i)) continue;
    const Point3& p = cloud.points[i];
    if (p.x() < box.min_corner.x() || p.x() > box.max_corner.x()) continue;
    if (p.y() < box.min_corner.y() || p.y() > box.max_corner.y()) continue;
    if (p.z() < box.min_corner.z()) continue;
    patch.indices.push_back(i);
    patch.normals.push_back(canonical_sign(normals.normals[i]));
  }
  if (patch.indices.empty()) throw EmptyPatchError("surface_patch: no ground points under the scaled footprint");
  return patch;
}

double compute_theta(const Point3& centroid, const Vec3& mean_normal) {
  const double cn = centroid.norm();
  const double nn = mean_normal.norm();
  if (!(cn > 0.0) || !(nn > 0.0)) throw DomainError("compute_theta: zero-length displacement or normal");
  const Vec3 up = mean_normal.z() < 0.0 ? Vec3(-mean_normal) : mean_normal;
  const double cosine = std::clamp(centroid.dot(up) / (cn * nn), -1.0, 1.0);
  return std::acos(cosine);
}

std::vector<ObstacleFeatures> extract_features(const SceneSegmentation& seg, const PointCloud& cloud,
                                               const NormalField& normals, double s) {
  std::vector<ObstacleFeatures> out;
  out.reserve(seg.clusters.size());
  for (std::size_t j = 0; j < seg.clusters.size(); ++j) {
    const std::vector<Point3> pts = gather(cloud, seg.clusters[j]);
    ObstacleFeatures f;
    f.cluster = j;
    f.point_count = pts.size();
    for (const Point3& p : pts) f.centroid += p;
    f.centroid /= static_cast<double>(pts.size());

    const Aabb box = compute_aabb(pts);
    f.box_dims = box.dims();
    f.volume = box.volume();
    if (!(f.volume > 0.0)) f.flags |= kFlagZeroVolume;

    try {
      f.shape = fit_ellipsoid(pts).shape;
    } catch (const DegenerateShapeError&) {
      f.shape = kShapeMax;
      f.flags |= kFlagDegenerateShape;
    }

    try {
      const SurfacePatch patch = surface_patch(seg, cloud, normals, j, s);
      Vec3 mean = Vec3::Zero();
      for (const Vec3& n : patch.normals) mean += n;
      f.surface_point_count = patch.indices.size();
      if (mean.norm() > 0.0) {
        f.mean_normal = mean.normalized();
        if (f.mean_normal.z() < 0.0) f.mean_normal = -f.mean_normal;
      } else {
        f.flags |= kFlagEmptyPatch;
      }
    } catch (const EmptyPatchError&) {
      f.flags |= kFlagEmptyPatch;
    }

    try {
      f.theta = compute_theta(f.centroid, f.mean_normal);
    } catch (const DomainError&) {
      f.theta = std::numbers::pi / 2.0;
      f.flags |= kFlagDegenerateTheta;
    }
    out.push_back(f);
  }
  return out;
}

std::vector<std::string> flag_names(unsigned flags) {
  std::vector<std::string> names;
  if (flags & kFlagDegenerateShape) names.emplace_back("degenerate_shape");
  if (flags & kFlagEmptyPatch) names.emplace_back("empty_patch");
  if (flags & kFlagZeroVolume) names.emplace_back("zero_volume");
  if (flags & kFlagDegenerateTheta) names.emplace_back("degenerate_theta");
  return names;
}

namespace {

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

nlohmann::json to_json(const ObstacleFeatures& f) {
  nlohmann::json j;
  j["cluster"] = f.cluster;
  j["point_count"] = f.point_count;
  j["centroid"] = vec_json(f.centroid);
  j["box_dims"] = vec_json(f.box_dims);
  j["volume"] = f.volume;
  j["shape"] = f.shape;
  j["mean_normal"] = vec_json(f.mean_normal);
  j["theta"] = f.theta;
  j["surface_count"] = f.surface_point_count;
  j["flags"] = flag_names(f.flags);
  return j;
}

ObstacleFeatures obstacle_features_from_json(const nlohmann::json& j) {
  try {
    ObstacleFeatures f;
    f.cluster = j.value("cluster", std::size_t{0});
    f.point_count = j.value("point_count", std::size_t{0});
    f.centroid = vec_from(j.at("centroid"));
    f.box_dims = vec_from(j.at("box_dims"));
    f.volume = j.at("volume").get<double>();
    f.shape = j.at("shape").get<double>();
    f.mean_normal = vec_from(j.at("mean_normal"));
    f.theta = j.at("theta").get<double>();
    f.surface_point_count = j.value("surface_count", std::size_t{0});
    for (const auto& name : j.value("flags", std::vector<std::string>{})) {
      if (name == "degenerate_shape") f.flags |= kFlagDegenerateShape;
      else if (name == "empty_patch") f.flags |= kFlagEmptyPatch;
      else if (name == "zero_volume") f.flags |= kFlagZeroVolume;
      else if (name == "degenerate_theta") f.flags |= kFlagDegenerateTheta;
      else throw ParseError("unknown obstacle flag '" + name + "'");
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed obstacle record: ") + e.what());
  }
}

}  // namespace pushability
