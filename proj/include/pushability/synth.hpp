#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pushability/affordance.hpp"
#include "pushability/geom.hpp"
#include "pushability/pointcloud.hpp"
#include "pushability/random.hpp"

// Synthetic terrain, rocks, sensor views and push-force labels.
namespace pushability::synth {

inline constexpr double kGravity = 9.81;

// ---------------------------------------------------------------------------
// Terrain
// ---------------------------------------------------------------------------

/// Classic 2D gradient noise with a smootherstep fade. Zero on the integer lattice.
double perlin2(double x, double y, std::uint64_t seed);

/// Regular height grid. Node (i, j) sits at origin + cell_size * (i, j).
struct HeightMap {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double cell_size = 1.0;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  std::vector<double> heights;  // row-major, j * nx + i

  double node(std::size_t i, std::size_t j) const { return heights[j * nx + i]; }
  double& node(std::size_t i, std::size_t j) { return heights[j * nx + i]; }
  Eigen::Vector2d max_corner() const;
  bool contains(double x, double y) const;

  /// Bilinear interpolation. Throws DomainError outside the grid.
  double height(double x, double y) const;

  /// Mean slope angle along unit direction u over [-half_span, +half_span] around (x, y) [rad].
  double slope_along(double x, double y, const Eigen::Vector2d& u, double half_span) const;
};

struct TerrainParams {
  double amplitude = 0.5;       // patch height scale [m]
  double window_sigma = 2.0;    // Gaussian window of each patch [m]
  double feature_size = 2.5;    // Perlin lattice period [m]
  std::size_t hills = 2;
  std::size_t pits = 2;
  double patch_spread = 4.0;    // patch centers uniform in [-spread, spread]^2 around the map center [m]
};

/// Flat square map of side `extent` centered on the origin, plus Gaussian-windowed Perlin
/// hills (added) and pits (subtracted) at seeded positions.
HeightMap make_terrain(double extent, double cell_size, std::uint64_t seed, const TerrainParams& params = {});

// ---------------------------------------------------------------------------
// Rocks
// ---------------------------------------------------------------------------

struct RockSpec {
  std::string name;
  Vec3 scale = Vec3::Ones();
  double mass = 1.0;  // kg
};

/// Boulder 0 through Boulder 5.
const std::vector<RockSpec>& rock_catalog();

/// Base superellipsoid |x/a|^(2/e) + |y/a|^(2/e) + |z/a|^(2/e) = 1 before scaling.
struct RockShape {
  double half_extent = 0.25;  // a [m]
  double exponent = 0.8;      // e; below 1 gives box-like rocks
  std::size_t resolution = 24;  // grid cells per cube face edge
};

/// Surface points with outward unit normals.
struct SurfaceSample {
  PointCloud cloud;
  std::vector<Vec3> normals;
};

/// Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d rotation_from_euler(double yaw, double pitch, double roll);
/// Yaw, pitch and roll each uniform in [-pi, pi).
Eigen::Matrix3d random_rotation(Rng& rng);

/// Half-extents of the unrotated rock.
Vec3 rock_half_extents(const RockSpec& spec, const RockShape& shape = {});

/// Surface area of the triangulated rock [m^2].
double rock_surface_area(const RockSpec& spec, const RockShape& shape = {});

/// Area-uniform surface sample of the scaled, rotated superellipsoid centered at the
/// origin. The sample size is round(area * density). Throws DomainError for density <= 0.
SurfaceSample make_rock(const RockSpec& spec, const Eigen::Matrix3d& rotation, double surface_density,
                        std::uint64_t seed, const RockShape& shape = {});

struct PlacedRock {
  SurfaceSample surface;
  double contact_height = 0.0;  // terrain maximum under the footprint [m]
};

/// Moves the rock's model origin to (x, y) and sets its lowest point to the highest terrain
/// height under its footprint (the xy projections of its points).
/// Throws DomainError when any footprint point is off the map.
PlacedRock place_rock(const HeightMap& terrain, const SurfaceSample& rock, double x, double y);

// ---------------------------------------------------------------------------
// Sensor view
// ---------------------------------------------------------------------------

/// Robot pose and sampling window. Output points are in the robot frame: x along the
/// heading, z up, origin base_height above the terrain under the robot.
struct ViewParams {
  Eigen::Vector2d robot_xy = Eigen::Vector2d::Zero();
  double heading = 0.0;          // [rad], world frame
  double base_height = 0.3;      // [m]
  double sensor_height = 0.2;    // above the robot origin [m]
  double ground_density = 300.0; // points per m^2 of horizontal area
  double window_near = 0.5;      // robot-frame x range of ground samples [m]
  double window_far = 6.0;
  double window_half_width = 2.0;
  /// Keep each rock point with probability max(0, n . v) toward the sensor.
  bool visibility = true;
  /// Drop ground samples inside a rock's footprint.
  bool hide_covered_ground = true;
};

struct SceneSample {
  PointCloud cloud;
  std::vector<int> labels;  // -1 ground, j for rock j
  std::size_t ground_count = 0;
  std::vector<std::size_t> rock_counts;
};

/// Jittered terrain grid followed by the rock points, in rock order.
/// Throws DomainError for a non-positive density or a window that leaves the map.
SceneSample sample_scene(const HeightMap& terrain, const std::vector<PlacedRock>& rocks, const ViewParams& view,
                         std::uint64_t seed);

// ---------------------------------------------------------------------------
// Force oracle
// ---------------------------------------------------------------------------

struct OracleParams {
  double mu = 0.5;              // static friction coefficient
  double arm_limit = 50.0;      // [N]
  std::size_t samples = 100;
};

/// m * g * (mu cos(phi) + sin(phi)), floored at 0.1 N.
double required_force(double mass, double phi, double mu);

/// Push feedback along the push direction. A movable rock peaks at F_req after 30% of the
/// samples and relaxes toward 0.6 F_req; a stuck rock pins the arm at its limit.
ForceSignal force_oracle(double mass, double phi, const OracleParams& params = {});

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

enum class TerrainClass { Uphill, Flat, Downhill };
std::string to_string(TerrainClass t);

struct GeneratorParams {
  std::size_t experiments = 90;
  std::size_t frames = 10;
  std::uint64_t seed = 0;
  double terrain_extent = 20.0;
  double cell_size = 0.1;
  TerrainParams terrain;
  RockShape rock_shape;
  double rock_density = 3000.0;
  double ground_density = 300.0;
  OracleParams oracle;
  SegmentationParams segmentation;
  double box_scale = 1.5;
  double start_distance_min = 3.5;  // robot-to-rock distance of the first frame [m]
  double start_distance_max = 4.5;
  double approach_step = 0.2;       // per frame [m]
  double uphill_min_slope = 0.0523598775598299;   // 3 deg
  double flat_max_slope = 0.0174532925199433;     // 1 deg
};

struct ExperimentSummary {
  int run = 0;
  std::string rock;
  TerrainClass terrain = TerrainClass::Flat;
  double slope = 0.0;
  double f_max = 0.0;
  Eigen::Vector2d rock_xy = Eigen::Vector2d::Zero();
  double heading = 0.0;
  std::size_t resampled_frames = 0;
};

struct Dataset {
  std::vector<PushRecord> records;
  std::vector<ExperimentSummary> experiments;
  std::vector<SceneSample> scenes;  // first frame of each experiment
};

/// Experiment i pushes rock i % 6 on terrain class (i / 6) % 3. Every frame is segmented and
/// featurized by the real pipeline; the rock's cluster is the one overlapping it most, and a
/// frame where the rock is not recovered is resampled. All frames share the run's label.
Dataset gen_dataset(const GeneratorParams& params);

/// Features of the cluster that best overlaps rock `rock` in a sampled scene, if any.
std::optional<ObstacleFeatures> featurize_rock(const SceneSample& scene, int rock, const SegmentationParams& seg,
                                               double box_scale);

}  // namespace pushability::synth
