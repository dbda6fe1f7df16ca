#include "pushability/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "pushability/affordance.hpp"
#include "pushability/config.hpp"
#include "pushability/errors.hpp"
#include "pushability/features.hpp"
#include "pushability/geom.hpp"
#include "pushability/ply.hpp"
#include "pushability/synth.hpp"
#include "pushability/vpp.hpp"

namespace pushability {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

PipelineConfig load_config(const Common& c) {
  PipelineConfig cfg = PipelineConfig::resolve(c.config.empty() ? std::nullopt : std::optional<fs::path>(c.config));
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DomainError("cannot create directory '" + dir.string() + "'");
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw DomainError("write failed for '" + path.string() + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Segmentation plus per-obstacle features for a cloud file.
struct Analysis {
  PointCloud cloud;
  NormalField normals;
  Vec3 ground_normal = Vec3::UnitZ();
  SceneSegmentation seg;
  std::vector<ObstacleFeatures> features;
};

Analysis analyze(const fs::path& path, const PipelineConfig& cfg) {
  Analysis a;
  a.cloud = load_ply(path).cloud;
  a.seg = segment_scene(a.cloud, cfg.segmentation, a.normals, a.ground_normal);
  a.features = extract_features(a.seg, a.cloud, a.normals, cfg.box_scale);
  return a;
}

std::vector<ObstacleFeatures> read_feature_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  std::vector<ObstacleFeatures> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(obstacle_features_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

int cmd_gen(const Common& c, std::size_t n, std::optional<std::size_t> frames, std::ostream& out) {
  if (n == 0) throw ParseError("--n must be at least 1");
  PipelineConfig cfg = load_config(c);
  cfg.experiments = n;
  if (frames) {
    if (*frames == 0) throw ParseError("--frames must be at least 1");
    cfg.frames = *frames;
  }
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  ensure_dir(dir / "scenes");

  const synth::Dataset data = synth::gen_dataset(cfg.generator_params());
  std::ostringstream jsonl;
  write_records(jsonl, data.records);
  write_file(dir / "dataset.jsonl", jsonl.str());

  json runs = json::array();
  for (std::size_t i = 0; i < data.experiments.size(); ++i) {
    const auto& e = data.experiments[i];
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03zu.ply", i);
    save_ply(dir / "scenes" / name, data.scenes[i].cloud, nullptr, &data.scenes[i].labels);
    runs.push_back({{"run", e.run},
                    {"seed", mix_seed(cfg.seed, i)},
                    {"rock", e.rock},
                    {"terrain", synth::to_string(e.terrain)},
                    {"slope", e.slope},
                    {"f_max", e.f_max},
                    {"rock_xy", {e.rock_xy.x(), e.rock_xy.y()}},
                    {"heading", e.heading},
                    {"resampled_frames", e.resampled_frames},
                    {"scene", std::string("scenes/") + name}});
  }
  const json manifest = {{"command", "gen"},
                         {"config", cfg.to_json()},
                         {"config_hash", cfg.hash()},
                         {"seed", cfg.seed},
                         {"experiments", cfg.experiments},
                         {"frames", cfg.frames},
                         {"record_count", data.records.size()},
                         {"dataset", "dataset.jsonl"},
                         {"dataset_hash", hex64(fnv1a64(jsonl.str()))},
                         {"runs", runs}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  out << "generated " << data.experiments.size() << " experiments, " << data.records.size() << " records in "
      << dir.string() << "\n";
  return kExitOk;
}

int cmd_segment(const Common& c, const std::string& input, std::ostream& out) {
  const PipelineConfig cfg = load_config(c);
  const Analysis a = analyze(input, cfg);
  json sizes = json::array();
  for (const auto& cl : a.seg.clusters) sizes.push_back(cl.size());
  const json summary = {{"input", fs::path(input).filename().string()},
                        {"points", a.cloud.size()},
                        {"obstacles", a.seg.obstacle_count()},
                        {"ground_points", a.seg.ground_indices.size()},
                        {"ground_fraction", static_cast<double>(a.seg.ground_indices.size()) / static_cast<double>(a.cloud.size())},
                        {"ground_normal", vec_json(a.ground_normal)},
                        {"cluster_sizes", sizes}};
  if (!c.out.empty()) {
    const fs::path dir(c.out);
    ensure_dir(dir);
    const std::string stem = fs::path(input).stem().string();
    save_ply(dir / (stem + "_segmented.ply"), a.cloud, &a.normals, &a.seg.labels);
    write_file(dir / (stem + "_summary.json"), summary.dump(2) + "\n");
  }
  out << summary.dump() << "\n";
  return kExitOk;
}

void emit_lines(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out.empty()) {
    out << text;
  } else {
    write_file(c.out, text);
  }
}

int cmd_classify(const Common& c, const std::string& input, std::ostream& out) {
  const PipelineConfig cfg = load_config(c);
  const Analysis a = analyze(input, cfg);
  std::ostringstream lines;
  for (const auto& f : a.features) {
    json j = to_json(f);
    j["vpp"] = to_json(evaluate(f, cfg.robot, cfg.thresholds));
    lines << j.dump() << "\n";
  }
  emit_lines(c, lines.str(), out);
  return kExitOk;
}

int cmd_train(const Common& c, const std::string& dataset, std::ostream& out) {
  const PipelineConfig cfg = load_config(c);
  const std::vector<PushRecord> records = load_records(dataset);
  if (records.empty()) throw ParseError("dataset '" + dataset + "' has no records");
  if (records.size() < 2) throw ParseError("dataset '" + dataset + "' needs at least 2 records to split");
  const auto [train, test] = split_dataset(records, cfg.test_fraction, cfg.seed);
  const AffordanceModel model = AffordanceModel::train(train);

  double sq = 0.0;
  double abs_err = 0.0;
  std::size_t agree = 0;
  for (const auto& r : test) {
    const Prediction p = model.predict(r.features, cfg.push_limit);
    sq += (p.mean - r.f_max) * (p.mean - r.f_max);
    abs_err += std::abs(p.mean - r.f_max);
    agree += (decide(p, cfg.push_limit) == Decision::Pushable) == (r.f_max <= cfg.push_limit) ? 1 : 0;
  }
  const auto nt = static_cast<double>(test.size());
  const std::string model_text = model.to_json().dump(2) + "\n";
  const json metrics = {{"train_size", train.size()},
                        {"test_size", test.size()},
                        {"test_fraction", cfg.test_fraction},
                        {"seed", cfg.seed},
                        {"test_rmse", std::sqrt(sq / nt)},
                        {"test_mae", abs_err / nt},
                        {"decision_agreement", static_cast<double>(agree) / nt},
                        {"noise_precision", model.posterior.noise_precision},
                        {"prior_precision", model.posterior.prior_precision},
                        {"config_hash", cfg.hash()},
                        {"model_hash", hex64(fnv1a64(model_text))}};

  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  ensure_dir(dir);
  write_file(dir / "model.json", model_text);
  std::ostringstream coef;
  write_coefficients_csv(coef, coefficient_report(model.posterior));
  write_file(dir / "coefficients.csv", coef.str());
  write_file(dir / "metrics.json", metrics.dump(2) + "\n");
  out << metrics.dump() << "\n";
  return kExitOk;
}

int cmd_predict(const Common& c, const std::string& model_path, const std::string& input, std::ostream& out) {
  const PipelineConfig cfg = load_config(c);
  const AffordanceModel model = AffordanceModel::load(model_path);
  std::string ext = fs::path(input).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  const std::vector<ObstacleFeatures> obstacles = ext == ".ply" ? analyze(input, cfg).features : read_feature_lines(input);

  std::ostringstream lines;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const auto& f = obstacles[i];
    const VppVerdict v = evaluate(f, cfg.robot, cfg.thresholds);
    json j = {{"obstacle", i},
              {"cluster", f.cluster},
              {"g", v.scored ? json(v.g) : json(nullptr)},
              {"class", to_string(v.klass)}};
    // Static obstacles are never pushed, so no force is predicted for them.
    if (v.klass == VppClass::Static) {
      j["filtered"] = true;
      j["decision"] = "filtered";
    } else {
      const Prediction p = model.predict(feature_vector(f), cfg.push_limit);
      j["filtered"] = false;
      j["prediction"] = {{"mean", p.mean}, {"variance", p.variance}, {"p_pushable", p.p_pushable}};
      j["decision"] = to_string(decide(p, cfg.push_limit));
    }
    lines << j.dump() << "\n";
  }
  emit_lines(c, lines.str(), out);
  return kExitOk;
}

int cmd_report(const Common& c, const std::string& model_path, const std::string& dataset, std::ostream& out) {
  const AffordanceModel model = AffordanceModel::load(model_path);
  const std::vector<PushRecord> records = load_records(dataset);

  struct Acc {
    std::size_t n = 0;
    double sum = 0.0;
    double sq = 0.0;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  for (const auto& r : records) {
    auto& a = groups[{r.rock, r.terrain}];
    ++a.n;
    a.sum += r.f_max;
  }
  for (const auto& r : records) {
    auto& a = groups[{r.rock, r.terrain}];
    const double d = r.f_max - a.sum / static_cast<double>(a.n);
    a.sq += d * d;
  }
  std::ostringstream forces;
  forces << "rock,terrain,count,mean,std\n";
  for (const auto& [key, a] : groups) {
    const double mean = a.sum / static_cast<double>(a.n);
    const double sd = a.n > 1 ? std::sqrt(a.sq / static_cast<double>(a.n - 1)) : 0.0;
    forces << key.first << ',' << key.second << ',' << a.n << ',' << fmt(mean) << ',' << fmt(sd) << "\n";
  }

  const CoefficientReport report = coefficient_report(model.posterior);
  std::ostringstream coef, grp;
  write_coefficients_csv(coef, report);
  write_groups_csv(grp, report);

  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  ensure_dir(dir);
  write_file(dir / "forces.csv", forces.str());
  write_file(dir / "coefficients.csv", coef.str());
  write_file(dir / "groups.csv", grp.str());
  out << "wrote forces.csv, coefficients.csv, groups.csv to " << dir.string() << "\n";
  return kExitOk;
}

void add_common(CLI::App* app, Common& c, const char* out_help) {
  app->add_option("--config", c.config, "pipeline config JSON (falls back to $PUSHABILITY_CONFIG)");
  app->add_option("--seed", c.seed, "override the config seed");
  app->add_option("--out", c.out, out_help);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rock pushability pipeline", "pushability"};
  app.require_subcommand(1);

  Common common;
  std::size_t n = 90;
  std::optional<std::size_t> frames;
  std::string input, model_path, dataset;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen, common, "output directory (default .)");
  gen->add_option("--n", n, "number of experiments");
  gen->add_option("--frames", frames, "frames per experiment");

  auto* segment = app.add_subcommand("segment", "segment a PLY cloud into ground and obstacles");
  add_common(segment, common, "directory for the labeled PLY and summary JSON");
  segment->add_option("cloud", input, "input PLY")->required();

  auto* classify = app.add_subcommand("classify", "features and visual verdicts per obstacle (JSONL)");
  add_common(classify, common, "output JSONL file (default stdout)");
  classify->add_option("cloud", input, "input PLY")->required();

  auto* train = app.add_subcommand("train", "fit the force regression");
  add_common(train, common, "output directory (default .)");
  train->add_option("dataset", dataset, "records JSONL")->required();

  auto* predict = app.add_subcommand("predict", "predict peak force and pushability per obstacle");
  add_common(predict, common, "output JSONL file (default stdout)");
  predict->add_option("model", model_path, "model JSON")->required();
  predict->add_option("input", input, "PLY cloud or obstacle-features JSONL")->required();

  auto* report = app.add_subcommand("report", "force and coefficient CSV reports");
  add_common(report, common, "output directory (default .)");
  report->add_option("model", model_path, "model JSON")->required();
  report->add_option("dataset", dataset, "records JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(common, n, frames, out);
    if (*segment) return cmd_segment(common, input, out);
    if (*classify) return cmd_classify(common, input, out);
    if (*train) return cmd_train(common, dataset, out);
    if (*predict) return cmd_predict(common, model_path, input, out);
    if (*report) return cmd_report(common, model_path, dataset, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace pushability
