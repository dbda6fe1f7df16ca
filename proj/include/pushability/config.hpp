#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "pushability/geom.hpp"
#include "pushability/synth.hpp"
#include "pushability/vpp.hpp"

namespace pushability {

/// Every tunable of the pipeline. The JSON keys of the first block follow the
/// hyperparameter table names (lower snake case).
struct PipelineConfig {
  double box_scale = 1.5;
  SegmentationParams segmentation;
  VppThresholds thresholds;
  RobotCapability robot;
  synth::OracleParams oracle;
  double push_limit = kPushLimit;  // decision threshold on predicted f_max [N]
  double test_fraction = 0.3;
  std::uint64_t seed = 0;

  // Synthetic data generation.
  std::size_t experiments = 90;
  std::size_t frames = 10;
  double rock_density = 3000.0;
  double ground_density = 300.0;
  synth::TerrainParams terrain;
  synth::RockShape rock_shape;

  /// Throws ParseError naming the offending key.
  void validate() const;

  nlohmann::json to_json() const;
  /// Starts from the defaults and applies the keys present in `j`; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  /// `path` if given, else $PUSHABILITY_CONFIG if set, else the defaults.
  static PipelineConfig resolve(const std::optional<std::filesystem::path>& path);

  /// FNV-1a 64 of the canonical JSON, as 16 hex digits.
  std::string hash() const;

  synth::GeneratorParams generator_params() const;
};

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace pushability
