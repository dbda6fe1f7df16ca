#include <algorithm>
#include <cmath>
#include <numbers>

#include "pushability/errors.hpp"
#include "pushability/features.hpp"
#include "pushability/synth.hpp"

namespace pushability::synth {
namespace {

constexpr double kPlacementSpread = 3.5;  // rock centers uniform in this square around the map center [m]
constexpr std::size_t kPlacementTries = 400;
constexpr std::size_t kTerrainTries = 32;
constexpr std::size_t kFrameAttempts = 50;
constexpr double kWindowBehindRock = 1.5;

Eigen::Vector2d rotate2(const Eigen::Vector2d& v, double a) {
  const double c = std::cos(a);
  const double s = std::sin(a);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

struct Placement {
  HeightMap terrain;
  Eigen::Vector2d xy;
  Eigen::Vector2d push_dir;
  double slope = 0.0;
};

bool class_accepts(TerrainClass t, double phi, const GeneratorParams& p) {
  switch (t) {
    case TerrainClass::Uphill: return phi >= p.uphill_min_slope;
    case TerrainClass::Downhill: return phi <= -p.uphill_min_slope;
    case TerrainClass::Flat: return std::abs(phi) <= p.flat_max_slope;
  }
  return false;
}

// Rejection search for a rock site whose slope along the push direction fits the class.
// Uphill and downhill push along +-gradient, flat pushes across it.
Placement find_placement(TerrainClass cls, double span, std::uint64_t run_seed, const GeneratorParams& params) {
  for (std::size_t t = 0; t < kTerrainTries; ++t) {
    Placement out;
    out.terrain = make_terrain(params.terrain_extent, params.cell_size, mix_seed(run_seed, 10 + t), params.terrain);
    Rng rng(mix_seed(run_seed, 200 + t));
    for (std::size_t k = 0; k < kPlacementTries; ++k) {
      const Eigen::Vector2d xy(rng.uniform(-kPlacementSpread, kPlacementSpread),
                               rng.uniform(-kPlacementSpread, kPlacementSpread));
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double jitter = rng.uniform(-0.35, 0.35);
      const Eigen::Vector2d grad(std::tan(out.terrain.slope_along(xy.x(), xy.y(), Eigen::Vector2d::UnitX(), span)),
                                 std::tan(out.terrain.slope_along(xy.x(), xy.y(), Eigen::Vector2d::UnitY(), span)));
      Eigen::Vector2d dir;
      if (grad.norm() < 1e-12) {
        dir = Eigen::Vector2d::UnitX();
      } else if (cls == TerrainClass::Flat) {
        dir = sign * Eigen::Vector2d(-grad.y(), grad.x()).normalized();
      } else {
        dir = (cls == TerrainClass::Uphill ? 1.0 : -1.0) * grad.normalized();
      }
      dir = rotate2(dir, jitter);
      const double phi = out.terrain.slope_along(xy.x(), xy.y(), dir, span);
      if (!class_accepts(cls, phi, params)) continue;
      out.xy = xy;
      out.push_dir = dir;
      out.slope = phi;
      return out;
    }
  }
  throw DomainError("gen_dataset: no rock site matches the " + to_string(cls) + " class");
}

}  // namespace

std::string to_string(TerrainClass t) {
  switch (t) {
    case TerrainClass::Uphill: return "uphill";
    case TerrainClass::Flat: return "flat";
    case TerrainClass::Downhill: return "downhill";
  }
  return "unknown";
}

std::optional<ObstacleFeatures> featurize_rock(const SceneSample& scene, int rock, const SegmentationParams& seg,
                                               double box_scale) {
  NormalField normals;
  Vec3 ground_normal;
  const SceneSegmentation s = segment_scene(scene.cloud, seg, normals, ground_normal);
  std::size_t best = 0;
  std::size_t best_overlap = 0;
  for (std::size_t c = 0; c < s.clusters.size(); ++c) {
    std::size_t overlap = 0;
    for (auto i : s.clusters[c]) overlap += scene.labels[i] == rock ? 1 : 0;
    if (overlap > best_overlap) {
      best_overlap = overlap;
      best = c;
    }
  }
  if (best_overlap == 0) return std::nullopt;
  auto features = extract_features(s, scene.cloud, normals, box_scale);
  return features[best];
}

Dataset gen_dataset(const GeneratorParams& params) {
  if (params.experiments < 1) throw DomainError("gen_dataset: need at least one experiment");
  if (params.frames < 1) throw DomainError("gen_dataset: need at least one frame");
  if (!(params.start_distance_min > 0.0) || params.start_distance_max < params.start_distance_min) {
    throw DomainError("gen_dataset: invalid start distance range");
  }
  const double last = params.start_distance_min - params.approach_step * static_cast<double>(params.frames - 1);
  if (!(last > 1.0)) throw DomainError("gen_dataset: approach ends too close to the rock");

  const auto& catalog = rock_catalog();
  Dataset data;
  for (std::size_t i = 0; i < params.experiments; ++i) {
    const auto run = static_cast<int>(i);
    const std::uint64_t run_seed = mix_seed(params.seed, i);
    const RockSpec& spec = catalog[i % catalog.size()];
    const auto cls = static_cast<TerrainClass>((i / catalog.size()) % 3);

    const Vec3 half = rock_half_extents(spec, params.rock_shape);
    const double span = std::max(0.15, 1.2 * half.head<2>().norm());
    const Placement site = find_placement(cls, span, run_seed, params);

    Rng rng(mix_seed(run_seed, 1));
    const Eigen::Matrix3d rotation = random_rotation(rng);
    const SurfaceSample rock = make_rock(spec, rotation, params.rock_density, mix_seed(run_seed, 2), params.rock_shape);
    const PlacedRock placed = place_rock(site.terrain, rock, site.xy.x(), site.xy.y());
    const double start = rng.uniform(params.start_distance_min, params.start_distance_max);
    const double f_max = fmax(force_oracle(spec.mass, site.slope, params.oracle));

    ExperimentSummary summary;
    summary.run = run;
    summary.rock = spec.name;
    summary.terrain = cls;
    summary.slope = site.slope;
    summary.f_max = f_max;
    summary.rock_xy = site.xy;
    summary.heading = std::atan2(site.push_dir.y(), site.push_dir.x());

    const Eigen::Vector2d lateral(-site.push_dir.y(), site.push_dir.x());
    for (std::size_t f = 0; f < params.frames; ++f) {
      const double distance = start - params.approach_step * static_cast<double>(f);
      bool done = false;
      for (std::size_t a = 0; a < kFrameAttempts && !done; ++a) {
        Rng frame_rng(mix_seed(run_seed, 1000 + 64 * f + a));
        ViewParams view;
        view.robot_xy = site.xy - distance * site.push_dir + frame_rng.uniform(-0.1, 0.1) * lateral;
        view.heading = summary.heading + frame_rng.uniform(-0.03, 0.03);
        view.ground_density = params.ground_density;
        view.window_far = distance + kWindowBehindRock;
        SceneSample scene = sample_scene(site.terrain, {placed}, view, frame_rng.next());
        const auto features = featurize_rock(scene, 0, params.segmentation, params.box_scale);
        if (!features) {
          ++summary.resampled_frames;
          continue;
        }
        PushRecord rec;
        rec.features = feature_vector(*features);
        rec.f_max = f_max;
        rec.run = run;
        rec.frame = static_cast<int>(f);
        rec.rock = spec.name;
        rec.terrain = to_string(cls);
        rec.slope = site.slope;
        data.records.push_back(std::move(rec));
        if (f == 0) data.scenes.push_back(std::move(scene));
        done = true;
      }
      if (!done) throw DomainError("gen_dataset: rock " + spec.name + " never segmented in run " + std::to_string(run));
    }
    data.experiments.push_back(summary);
  }
  return data;
}

}  // namespace pushability::synth
