#include "pushability/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "pushability/errors.hpp"

namespace pushability {
namespace {

using nlohmann::json;

// Reads j[key] into `out` when present, recording the key as consumed.
template <class T>
void take(const json& j, const char* key, T& out, std::set<std::string>& seen) {
  seen.insert(key);
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("config: '") + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& seen, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key())) throw ParseError("config: unknown key '" + where + it.key() + "'");
  }
}

const json& object_at(const json& j, const char* key) {
  const json& o = j.at(key);
  if (!o.is_object()) throw ParseError(std::string("config: '") + key + "' must be an object");
  return o;
}

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw ParseError(std::string("config: '") + key + "' " + what);
}

}  // namespace

void PipelineConfig::validate() const {
  require(box_scale >= 1.0, "bounding_box_scale_factor", "must be >= 1");
  require(segmentation.k >= 3, "nearest_neighbors_count", "must be >= 3");
  require(segmentation.radius > 0.0, "neighbor_search_radius", "must be positive");
  require(segmentation.t_cs > 0.0 && segmentation.t_cs <= 1.0, "cosine_similarity_threshold", "must be in (0, 1]");
  require(segmentation.epsilon > 0.0, "dbscan_neighborhood_radius", "must be positive");
  require(segmentation.min_pts >= 1, "dbscan_minimum_points", "must be >= 1");
  require(thresholds.low >= 0.0 && thresholds.low < thresholds.high, "visual_likelihood_low_threshold",
          "must be non-negative and below the high threshold");
  require(push_limit > 0.0, "push_force_limit", "must be positive");
  require(test_fraction > 0.0 && test_fraction < 1.0, "test_fraction", "must be in (0, 1)");
  require(oracle.mu >= 0.0, "oracle.friction_coefficient", "must be non-negative");
  require(oracle.arm_limit > 0.0, "oracle.arm_limit", "must be positive");
  require(oracle.samples >= 2, "oracle.samples", "must be >= 2");
  require(experiments >= 1, "generator.experiments", "must be >= 1");
  require(frames >= 1, "generator.frames", "must be >= 1");
  require(rock_density > 0.0, "generator.rock_density", "must be positive");
  require(ground_density > 0.0, "generator.ground_density", "must be positive");
  require(terrain.window_sigma > 0.0, "generator.terrain_window_sigma", "must be positive");
  require(terrain.feature_size > 0.0, "generator.terrain_feature_size", "must be positive");
  require(rock_shape.exponent > 0.0, "generator.rock_exponent", "must be positive");
  require(rock_shape.half_extent > 0.0, "generator.rock_half_extent", "must be positive");
  try {
    robot.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string("config: robot: ") + e.what());
  }
}

nlohmann::json PipelineConfig::to_json() const {
  json robot_j = {
      {"body_dims", {robot.body_dims.x(), robot.body_dims.y(), robot.body_dims.z()}},
      {"max_hoof_elevation", robot.max_hoof_elevation},
      {"step_length", robot.step_length},
      {"interfoot_distance", robot.interfoot_distance},
      {"max_push_force", robot.max_push_force},
      {"capability_score", robot.capability_override ? json(*robot.capability_override) : json(nullptr)},
  };
  return {
      {"bounding_box_scale_factor", box_scale},
      {"nearest_neighbors_count", segmentation.k},
      {"neighbor_search_radius", segmentation.radius},
      {"cosine_similarity_threshold", segmentation.t_cs},
      {"dbscan_neighborhood_radius", segmentation.epsilon},
      {"dbscan_minimum_points", segmentation.min_pts},
      {"visual_likelihood_high_threshold", thresholds.high},
      {"visual_likelihood_low_threshold", thresholds.low},
      {"push_force_limit", push_limit},
      {"test_fraction", test_fraction},
      {"seed", seed},
      {"robot", robot_j},
      {"oracle", {{"friction_coefficient", oracle.mu}, {"arm_limit", oracle.arm_limit}, {"samples", oracle.samples}}},
      {"generator",
       {{"experiments", experiments},
        {"frames", frames},
        {"rock_density", rock_density},
        {"ground_density", ground_density},
        {"terrain_amplitude", terrain.amplitude},
        {"terrain_window_sigma", terrain.window_sigma},
        {"terrain_feature_size", terrain.feature_size},
        {"rock_exponent", rock_shape.exponent},
        {"rock_half_extent", rock_shape.half_extent}}},
  };
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  PipelineConfig c;
  std::set<std::string> seen;
  take(j, "bounding_box_scale_factor", c.box_scale, seen);
  take(j, "nearest_neighbors_count", c.segmentation.k, seen);
  take(j, "neighbor_search_radius", c.segmentation.radius, seen);
  take(j, "cosine_similarity_threshold", c.segmentation.t_cs, seen);
  take(j, "dbscan_neighborhood_radius", c.segmentation.epsilon, seen);
  take(j, "dbscan_minimum_points", c.segmentation.min_pts, seen);
  take(j, "visual_likelihood_high_threshold", c.thresholds.high, seen);
  take(j, "visual_likelihood_low_threshold", c.thresholds.low, seen);
  take(j, "push_force_limit", c.push_limit, seen);
  take(j, "test_fraction", c.test_fraction, seen);
  take(j, "seed", c.seed, seen);

  seen.insert("robot");
  if (j.contains("robot")) {
    const json& r = object_at(j, "robot");
    std::set<std::string> rs;
    std::vector<double> dims;
    take(r, "body_dims", dims, rs);
    if (r.contains("body_dims")) {
      require(dims.size() == 3, "robot.body_dims", "must have three entries");
      c.robot.body_dims = Vec3(dims[0], dims[1], dims[2]);
    }
    take(r, "max_hoof_elevation", c.robot.max_hoof_elevation, rs);
    take(r, "step_length", c.robot.step_length, rs);
    take(r, "interfoot_distance", c.robot.interfoot_distance, rs);
    take(r, "max_push_force", c.robot.max_push_force, rs);
    rs.insert("capability_score");
    if (r.contains("capability_score") && !r.at("capability_score").is_null()) {
      double v = 0.0;
      take(r, "capability_score", v, rs);
      c.robot.capability_override = v;
    }
    reject_unknown(r, rs, "robot.");
  }

  seen.insert("oracle");
  if (j.contains("oracle")) {
    const json& o = object_at(j, "oracle");
    std::set<std::string> os;
    take(o, "friction_coefficient", c.oracle.mu, os);
    take(o, "arm_limit", c.oracle.arm_limit, os);
    take(o, "samples", c.oracle.samples, os);
    reject_unknown(o, os, "oracle.");
  }

  seen.insert("generator");
  if (j.contains("generator")) {
    const json& g = object_at(j, "generator");
    std::set<std::string> gs;
    take(g, "experiments", c.experiments, gs);
    take(g, "frames", c.frames, gs);
    take(g, "rock_density", c.rock_density, gs);
    take(g, "ground_density", c.ground_density, gs);
    take(g, "terrain_amplitude", c.terrain.amplitude, gs);
    take(g, "terrain_window_sigma", c.terrain.window_sigma, gs);
    take(g, "terrain_feature_size", c.terrain.feature_size, gs);
    take(g, "rock_exponent", c.rock_shape.exponent, gs);
    take(g, "rock_half_extent", c.rock_shape.half_extent, gs);
    reject_unknown(g, gs, "generator.");
  }

  reject_unknown(j, seen, "");
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

PipelineConfig PipelineConfig::resolve(const std::optional<std::filesystem::path>& path) {
  if (path) return load(*path);
  if (const char* env = std::getenv("PUSHABILITY_CONFIG"); env && *env) return load(env);
  return PipelineConfig{};
}

std::string PipelineConfig::hash() const { return hex64(fnv1a64(to_json().dump())); }

synth::GeneratorParams PipelineConfig::generator_params() const {
  synth::GeneratorParams g;
  g.experiments = experiments;
  g.frames = frames;
  g.seed = seed;
  g.terrain = terrain;
  g.rock_shape = rock_shape;
  g.rock_density = rock_density;
  g.ground_density = ground_density;
  g.oracle = oracle;
  g.segmentation = segmentation;
  g.box_scale = box_scale;
  return g;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace pushability
