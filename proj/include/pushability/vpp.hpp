#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "pushability/features.hpp"

namespace pushability {

/// Force at which a push is considered to fail [N]; also the reference for the capability score.
inline constexpr double kReferencePushForce = 20.0;

/// Physical limits of the robot doing the pushing.
struct RobotCapability {
  Vec3 body_dims{0.70, 0.31, 0.40};  // L, W, H [m]
  double max_hoof_elevation = 0.16;  // [m]
  double step_length = 0.25;         // [m]
  double interfoot_distance = 0.28;  // [m]
  double max_push_force = 20.0;      // [N]
  /// Explicit capability score; when unset it is max_push_force / 20 N times 1 m³.
  std::optional<double> capability_override;

  double capability_score() const;
  void validate() const;
};

enum class VppClass { Static, Pushable, Override };

std::string to_string(VppClass c);
VppClass vpp_class_from_string(const std::string& s);

struct VppVerdict {
  double g = 0.0;
  VppClass klass = VppClass::Static;
  /// False when the obstacle was not scored (flagged or zero volume).
  bool scored = true;
};

struct VppThresholds {
  double low = 0.3;
  double high = 0.8;
};

/// g = delta / (V * max(E, floor)) * (1 - theta / pi). Throws DomainError when V <= 0.
double likelihood(double capability, double volume, double shape, double theta);
double likelihood(const ObstacleFeatures& f, const RobotCapability& cap);

/// Static if g <= low, Override if g >= high, Pushable in between.
VppClass classify(double g, const VppThresholds& t = {});

/// Scores and classifies one obstacle; flagged or zero-volume obstacles are reported Static unscored.
VppVerdict evaluate(const ObstacleFeatures& f, const RobotCapability& cap, const VppThresholds& t = {});

nlohmann::json to_json(const VppVerdict& v);

}  // namespace pushability
