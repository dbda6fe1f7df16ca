#include "pushability/pointcloud.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pushability/random.hpp"

namespace pushability {

std::size_t NormalField::valid_count() const {
  return static_cast<std::size_t>(std::count_if(valid.begin(), valid.end(), [](std::uint8_t v) { return v != 0; }));
}

Vec3 canonical_sign(const Vec3& n) {
  constexpr double kFlat = 1e-9;
  if (std::abs(n.z()) >= kFlat) return n.z() < 0.0 ? Vec3(-n) : n;
  if (std::abs(n.x()) >= kFlat) return n.x() < 0.0 ? Vec3(-n) : n;
  return n.y() < 0.0 ? Vec3(-n) : n;
}

std::vector<Point3> gather(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  std::vector<Point3> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(cloud.points.at(i));
  return out;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace pushability
