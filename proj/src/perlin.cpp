#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "pushability/random.hpp"
#include "pushability/synth.hpp"

namespace pushability::synth {
namespace {

struct Permutation {
  std::uint64_t seed = 0;
  bool ready = false;
  std::array<std::uint8_t, 512> p{};
};

const std::array<std::uint8_t, 512>& permutation(std::uint64_t seed) {
  thread_local Permutation cache;
  if (!cache.ready || cache.seed != seed) {
    std::array<std::uint8_t, 256> base{};
    std::iota(base.begin(), base.end(), std::uint8_t{0});
    Rng rng(mix_seed(seed, 0x5045524CULL));
    for (std::size_t i = 255; i > 0; --i) std::swap(base[i], base[rng.index(i + 1)]);
    for (std::size_t i = 0; i < 512; ++i) cache.p[i] = base[i & 255];
    cache.seed = seed;
    cache.ready = true;
  }
  return cache.p;
}

// Eight unit gradients; with unit gradients the 2D noise stays within +-sqrt(2)/2.
constexpr double kDiag = 0.70710678118654752440;
constexpr std::array<std::array<double, 2>, 8> kGradients = {{
    {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0},
    {kDiag, kDiag}, {-kDiag, kDiag}, {kDiag, -kDiag}, {-kDiag, -kDiag},
}};

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

double dot_grad(std::uint8_t hash, double x, double y) {
  const auto& g = kGradients[hash & 7];
  return g[0] * x + g[1] * y;
}

}  // namespace

double perlin2(double x, double y, std::uint64_t seed) {
  const auto& p = permutation(seed);
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const auto xi = static_cast<std::size_t>(static_cast<std::int64_t>(fx) & 255);
  const auto yi = static_cast<std::size_t>(static_cast<std::int64_t>(fy) & 255);
  const double dx = x - fx;
  const double dy = y - fy;

  const std::uint8_t aa = p[p[xi] + yi];
  const std::uint8_t ab = p[p[xi] + yi + 1];
  const std::uint8_t ba = p[p[xi + 1] + yi];
  const std::uint8_t bb = p[p[xi + 1] + yi + 1];

  const double u = fade(dx);
  const double v = fade(dy);
  const double x0 = std::lerp(dot_grad(aa, dx, dy), dot_grad(ba, dx - 1.0, dy), u);
  const double x1 = std::lerp(dot_grad(ab, dx, dy - 1.0), dot_grad(bb, dx - 1.0, dy - 1.0), u);
  return std::lerp(x0, x1, v);
}

}  // namespace pushability::synth
