#include <algorithm>
#include <cmath>
#include <numbers>

#include "pushability/errors.hpp"
#include "pushability/synth.hpp"

namespace pushability::synth {

double required_force(double mass, double phi, double mu) {
  if (!(mass > 0.0)) throw DomainError("force oracle: mass must be positive");
  if (!(std::abs(phi) < 0.5 * std::numbers::pi)) throw DomainError("force oracle: |slope| must be below pi/2");
  if (!(mu >= 0.0)) throw DomainError("force oracle: friction coefficient must be non-negative");
  return std::max(0.1, mass * kGravity * (mu * std::cos(phi) + std::sin(phi)));
}

ForceSignal force_oracle(double mass, double phi, const OracleParams& params) {
  if (params.samples < 2) throw DomainError("force oracle: need at least 2 samples");
  if (!(params.arm_limit > 0.0)) throw DomainError("force oracle: arm limit must be positive");
  const double f_req = required_force(mass, phi, params.mu);
  // The arm pushes along the push direction, so the reaction points back and down the slope.
  const Vec3 dir(-std::cos(phi), 0.0, -std::sin(phi));

  const std::size_t n = params.samples;
  const auto rise = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.3 * static_cast<double>(n))));
  ForceSignal signal;
  signal.samples.reserve(n);
  const bool stuck = f_req > params.arm_limit;
  const double peak = stuck ? params.arm_limit : f_req;
  for (std::size_t i = 0; i < n; ++i) {
    double f;
    if (i < rise) {
      f = peak * static_cast<double>(i + 1) / static_cast<double>(rise);
    } else if (stuck) {
      f = peak;
    } else {
      const double tau = static_cast<double>(i + 1 - rise) / (0.2 * static_cast<double>(n));
      f = peak * (0.6 + 0.4 * std::exp(-tau));
    }
    signal.samples.push_back(f * dir);
  }
  return signal;
}

}  // namespace pushability::synth
