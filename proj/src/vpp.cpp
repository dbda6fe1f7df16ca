#include "pushability/vpp.hpp"

#include <algorithm>
#include <numbers>

#include "pushability/errors.hpp"

namespace pushability {

double RobotCapability::capability_score() const {
  if (capability_override) return *capability_override;
  constexpr double kReferenceVolume = 1.0;  // m³
  return max_push_force / kReferencePushForce * kReferenceVolume;
}

void RobotCapability::validate() const {
  if (!(body_dims.minCoeff() > 0.0) || !(max_hoof_elevation > 0.0) || !(step_length > 0.0) ||
      !(interfoot_distance > 0.0) || !(max_push_force > 0.0)) {
    throw DomainError("robot capability values must be positive");
  }
  if (!(capability_score() > 0.0)) throw DomainError("capability score must be positive");
}

std::string to_string(VppClass c) {
  switch (c) {
    case VppClass::Static: return "Static";
    case VppClass::Pushable: return "Pushable";
    case VppClass::Override: return "Override";
  }
  return "Static";
}

VppClass vpp_class_from_string(const std::string& s) {
  if (s == "Static") return VppClass::Static;
  if (s == "Pushable") return VppClass::Pushable;
  if (s == "Override") return VppClass::Override;
  throw ParseError("unknown VPP class '" + s + "'");
}

double likelihood(double capability, double volume, double shape, double theta) {
  if (!(volume > 0.0)) throw DomainError("likelihood: obstacle volume must be positive");
  const double t = std::clamp(theta, 0.0, std::numbers::pi);
  return capability / (volume * std::max(shape, kShapeFloor)) * (1.0 - t / std::numbers::pi);
}

double likelihood(const ObstacleFeatures& f, const RobotCapability& cap) {
  return likelihood(cap.capability_score(), f.volume, f.shape, f.theta);
}

VppClass classify(double g, const VppThresholds& t) {
  if (!(t.low < t.high)) throw DomainError("classify: low threshold must be below high threshold");
  if (g <= t.low) return VppClass::Static;
  if (g >= t.high) return VppClass::Override;
  return VppClass::Pushable;
}

VppVerdict evaluate(const ObstacleFeatures& f, const RobotCapability& cap, const VppThresholds& t) {
  if (f.flagged() || !(f.volume > 0.0)) return VppVerdict{0.0, VppClass::Static, false};
  const double g = likelihood(f, cap);
  return VppVerdict{g, classify(g, t), true};
}

nlohmann::json to_json(const VppVerdict& v) {
  return nlohmann::json{{"g", v.g}, {"class", to_string(v.klass)}, {"scored", v.scored}};
}

}  // namespace pushability
