#include <algorithm>
#include <cmath>

#include "pushability/errors.hpp"
#include "pushability/synth.hpp"

namespace pushability::synth {

Eigen::Vector2d HeightMap::max_corner() const {
  return origin + cell_size * Eigen::Vector2d(static_cast<double>(nx - 1), static_cast<double>(ny - 1));
}

bool HeightMap::contains(double x, double y) const {
  if (nx < 2 || ny < 2) return false;
  const Eigen::Vector2d hi = max_corner();
  const double tol = 1e-9 * cell_size;
  return x >= origin.x() - tol && x <= hi.x() + tol && y >= origin.y() - tol && y <= hi.y() + tol;
}

double HeightMap::height(double x, double y) const {
  if (!contains(x, y)) throw DomainError("terrain query outside the height map");
  const double u = (x - origin.x()) / cell_size;
  const double v = (y - origin.y()) / cell_size;
  const auto i = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(u))), nx - 2);
  const auto j = std::min(static_cast<std::size_t>(std::max(0.0, std::floor(v))), ny - 2);
  const double s = std::clamp(u - static_cast<double>(i), 0.0, 1.0);
  const double t = std::clamp(v - static_cast<double>(j), 0.0, 1.0);
  const double h0 = std::lerp(node(i, j), node(i + 1, j), s);
  const double h1 = std::lerp(node(i, j + 1), node(i + 1, j + 1), s);
  return std::lerp(h0, h1, t);
}

double HeightMap::slope_along(double x, double y, const Eigen::Vector2d& u, double half_span) const {
  if (!(half_span > 0.0)) throw DomainError("slope_along: half_span must be positive");
  const Eigen::Vector2d d = u.normalized() * half_span;
  const double rise = height(x + d.x(), y + d.y()) - height(x - d.x(), y - d.y());
  return std::atan(rise / (2.0 * half_span));
}

HeightMap make_terrain(double extent, double cell_size, std::uint64_t seed, const TerrainParams& params) {
  if (!(extent > 0.0) || !(cell_size > 0.0)) throw DomainError("make_terrain: extent and cell_size must be positive");
  const double cells = std::floor(extent / cell_size + 1e-9);
  if (cells < 1.0 || cells > 20000.0) throw DomainError("make_terrain: extent / cell_size out of range");
  if (!(params.window_sigma > 0.0) || !(params.feature_size > 0.0)) {
    throw DomainError("make_terrain: window_sigma and feature_size must be positive");
  }

  HeightMap map;
  map.nx = map.ny = static_cast<std::size_t>(cells) + 1;
  map.cell_size = cell_size;
  map.origin = Eigen::Vector2d::Constant(-0.5 * cell_size * cells);
  map.heights.assign(map.nx * map.ny, 0.0);
  if (params.amplitude == 0.0) return map;

  struct Patch {
    Eigen::Vector2d center;
    Eigen::Vector2d noise_offset;
    double sign;
    std::uint64_t noise_seed;
  };
  std::vector<Patch> patches;
  Rng rng(mix_seed(seed, 1));
  const std::size_t total = params.hills + params.pits;
  for (std::size_t k = 0; k < total; ++k) {
    Patch p;
    p.center = {rng.uniform(-params.patch_spread, params.patch_spread), rng.uniform(-params.patch_spread, params.patch_spread)};
    // Offsetting the noise keeps the lattice zeros of different patches from lining up.
    p.noise_offset = {rng.uniform(0.0, 64.0), rng.uniform(0.0, 64.0)};
    p.sign = k < params.hills ? 1.0 : -1.0;
    p.noise_seed = mix_seed(seed, 100 + k);
    patches.push_back(p);
  }

  const double inv_two_var = 1.0 / (2.0 * params.window_sigma * params.window_sigma);
  // Patch-major order keeps each patch's noise permutation hot.
  for (const auto& p : patches) {
    for (std::size_t j = 0; j < map.ny; ++j) {
      for (std::size_t i = 0; i < map.nx; ++i) {
        const Eigen::Vector2d q =
            map.origin + cell_size * Eigen::Vector2d(static_cast<double>(i), static_cast<double>(j));
        const double window = std::exp(-(q - p.center).squaredNorm() * inv_two_var);
        const Eigen::Vector2d nq = q / params.feature_size + p.noise_offset;
        map.node(i, j) += p.sign * params.amplitude * window * 0.5 * (1.0 + perlin2(nq.x(), nq.y(), p.noise_seed));
      }
    }
  }
  return map;
}

}  // namespace pushability::synth
