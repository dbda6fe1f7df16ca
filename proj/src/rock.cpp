#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Geometry>

#include "pushability/errors.hpp"
#include "pushability/synth.hpp"

namespace pushability::synth {
namespace {

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
};

// Cube-sphere grid projected radially onto the unit superellipsoid, then scaled per axis.
Mesh rock_mesh(const RockSpec& spec, const RockShape& shape) {
  if (!(shape.half_extent > 0.0) || !(shape.exponent > 0.0) || shape.resolution < 1) {
    throw DomainError("rock shape parameters must be positive");
  }
  if (!(spec.scale.minCoeff() > 0.0)) throw DomainError("rock scale must be positive");
  const std::size_t n = shape.resolution;
  const double power = 2.0 / shape.exponent;
  const Vec3 half = rock_half_extents(spec, shape);

  Mesh mesh;
  for (int axis = 0; axis < 3; ++axis) {
    for (double side : {1.0, -1.0}) {
      const std::size_t base = mesh.vertices.size();
      for (std::size_t j = 0; j <= n; ++j) {
        for (std::size_t i = 0; i <= n; ++i) {
          Vec3 d;
          d[axis] = side;
          d[(axis + 1) % 3] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n);
          d[(axis + 2) % 3] = -1.0 + 2.0 * static_cast<double>(j) / static_cast<double>(n);
          const double f = std::pow(std::abs(d.x()), power) + std::pow(std::abs(d.y()), power) +
                           std::pow(std::abs(d.z()), power);
          const Vec3 unit = d * std::pow(f, -1.0 / power);
          mesh.vertices.push_back(unit.cwiseProduct(half));
        }
      }
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t v00 = base + j * (n + 1) + i;
          const std::size_t v10 = v00 + 1;
          const std::size_t v01 = v00 + n + 1;
          const std::size_t v11 = v01 + 1;
          mesh.triangles.push_back({v00, v10, v11});
          mesh.triangles.push_back({v00, v11, v01});
        }
      }
    }
  }
  return mesh;
}

double triangle_area(const Mesh& m, const std::array<std::size_t, 3>& t) {
  return 0.5 * (m.vertices[t[1]] - m.vertices[t[0]]).cross(m.vertices[t[2]] - m.vertices[t[0]]).norm();
}

}  // namespace

const std::vector<RockSpec>& rock_catalog() {
  static const std::vector<RockSpec> catalog = {
      {"Boulder 0", Vec3(1.0, 1.0, 1.0), 37.75}, {"Boulder 1", Vec3(0.6, 0.6, 0.6), 8.85},
      {"Boulder 2", Vec3(0.5, 0.5, 0.5), 5.12},  {"Boulder 3", Vec3(0.3, 0.3, 0.4), 1.20},
      {"Boulder 4", Vec3(0.25, 0.25, 0.4), 0.78}, {"Boulder 5", Vec3(0.2, 0.2, 0.4), 0.5},
  };
  return catalog;
}

Eigen::Matrix3d rotation_from_euler(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  const double yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double pitch = rng.uniform(-std::numbers::pi, std::numbers::pi);
  const double roll = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return rotation_from_euler(yaw, pitch, roll);
}

Vec3 rock_half_extents(const RockSpec& spec, const RockShape& shape) { return shape.half_extent * spec.scale; }

double rock_surface_area(const RockSpec& spec, const RockShape& shape) {
  const Mesh mesh = rock_mesh(spec, shape);
  double area = 0.0;
  for (const auto& t : mesh.triangles) area += triangle_area(mesh, t);
  return area;
}

SurfaceSample make_rock(const RockSpec& spec, const Eigen::Matrix3d& rotation, double surface_density,
                        std::uint64_t seed, const RockShape& shape) {
  if (!(surface_density > 0.0)) throw DomainError("make_rock: surface density must be positive");
  const Mesh mesh = rock_mesh(spec, shape);

  // Areas are taken before rotating so the sample size does not depend on the pose.
  std::vector<double> cdf;
  cdf.reserve(mesh.triangles.size());
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    total += triangle_area(mesh, t);
    cdf.push_back(total);
  }
  const auto count = static_cast<std::size_t>(std::llround(total * surface_density));

  SurfaceSample out;
  out.cloud.points.reserve(count);
  out.normals.reserve(count);
  Rng rng(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), pick);
    if (it == cdf.end()) --it;
    const auto& t = mesh.triangles[static_cast<std::size_t>(it - cdf.begin())];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Vec3 p = (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c;
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3((a + b + c).normalized());
    // The surface is star-shaped about the origin, so outward means away from it.
    if (n.dot(a + b + c) < 0.0) n = -n;
    out.cloud.points.push_back(rotation * p);
    out.normals.push_back(rotation * n);
  }
  return out;
}

PlacedRock place_rock(const HeightMap& terrain, const SurfaceSample& rock, double x, double y) {
  if (rock.cloud.empty()) throw DomainError("place_rock: empty rock");
  double contact = -std::numeric_limits<double>::infinity();
  double min_z = std::numeric_limits<double>::infinity();
  for (const auto& p : rock.cloud.points) {
    const double px = p.x() + x;
    const double py = p.y() + y;
    if (!terrain.contains(px, py)) throw DomainError("place_rock: rock footprint leaves the terrain");
    contact = std::max(contact, terrain.height(px, py));
    min_z = std::min(min_z, p.z());
  }
  PlacedRock placed;
  placed.contact_height = contact;
  placed.surface = rock;
  const Vec3 shift(x, y, contact - min_z);
  for (auto& p : placed.surface.cloud.points) p += shift;
  return placed;
}

}  // namespace pushability::synth
