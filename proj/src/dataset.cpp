#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>

#include "pushability/affordance.hpp"
#include "pushability/errors.hpp"

namespace pushability {

FeatureVector feature_vector(const ObstacleFeatures& f) {
  FeatureVector v;
  v << f.centroid.x(), f.centroid.y(), f.centroid.z(), f.box_dims.x(), f.box_dims.y(), f.box_dims.z(), f.volume,
      f.shape, f.mean_normal.x(), f.mean_normal.y(), f.mean_normal.z(), f.theta;
  return v;
}

nlohmann::json to_json(const PushRecord& r) {
  nlohmann::json features = nlohmann::json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) features[std::string(kFeatureNames[i])] = r.features[i];
  nlohmann::json j;
  j["features"] = std::move(features);
  j["f_max"] = r.f_max;
  if (r.run >= 0) j["run"] = r.run;
  if (r.frame >= 0) j["frame"] = r.frame;
  if (!r.rock.empty()) j["rock"] = r.rock;
  if (!r.terrain.empty()) j["terrain"] = r.terrain;
  if (r.run >= 0) j["slope"] = r.slope;
  return j;
}

PushRecord push_record_from_json(const nlohmann::json& j) {
  try {
    PushRecord r;
    const auto& features = j.at("features");
    for (std::size_t i = 0; i < kFeatureCount; ++i) r.features[i] = features.at(std::string(kFeatureNames[i])).get<double>();
    r.f_max = j.at("f_max").get<double>();
    if (!r.features.allFinite() || !std::isfinite(r.f_max)) throw ParseError("non-finite value in push record");
    if (r.f_max < 0.0) throw ParseError("negative f_max in push record");
    r.run = j.value("run", -1);
    r.frame = j.value("frame", -1);
    r.rock = j.value("rock", std::string());
    r.terrain = j.value("terrain", std::string());
    r.slope = j.value("slope", 0.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed push record: ") + e.what());
  }
}

std::vector<PushRecord> read_records(std::istream& in) {
  std::vector<PushRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(push_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<PushRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return read_records(in);
}

void write_records(std::ostream& out, const std::vector<PushRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double test_fraction,
                                                                            std::uint64_t seed) {
  if (n < 2) throw DomainError("split_dataset: need at least 2 records");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw DomainError("split_dataset: fraction must be in (0, 1)");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);

  // The epsilon absorbs representation error such as 900 * 0.3 landing above 270.
  auto n_test = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * test_fraction - 1e-9));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  std::vector<std::size_t> test(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  return {std::move(train), std::move(test)};
}

Standardizer Standardizer::fit(const std::vector<PushRecord>& records) {
  Standardizer s;
  if (records.empty()) return s;
  const auto n = static_cast<double>(records.size());
  for (const auto& r : records) s.mean += r.features;
  s.mean /= n;
  FeatureVector var = FeatureVector::Zero();
  for (const auto& r : records) var += (r.features - s.mean).cwiseAbs2();
  var /= n;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const double sd = std::sqrt(var[i]);
    // Relative test so features that are constant up to rounding count as constant.
    s.constant[i] = !(sd > 1e-12 * std::max(1.0, std::abs(s.mean[i])));
    s.scale[i] = s.constant[i] ? 1.0 : sd;
  }
  return s;
}

FeatureVector Standardizer::transform(const FeatureVector& x) const {
  FeatureVector z;
  for (std::size_t i = 0; i < kFeatureCount; ++i) z[i] = constant[i] ? 0.0 : (x[i] - mean[i]) / scale[i];
  return z;
}

FeatureVector Standardizer::inverse(const FeatureVector& z) const {
  FeatureVector x;
  for (std::size_t i = 0; i < kFeatureCount; ++i) x[i] = constant[i] ? mean[i] : z[i] * scale[i] + mean[i];
  return x;
}

Eigen::VectorXd design_row(const FeatureVector& x, const Standardizer& standardizer) {
  Eigen::VectorXd row(kFeatureCount + 1);
  row[0] = 1.0;
  row.tail<kFeatureCount>() = standardizer.transform(x);
  return row;
}

Eigen::MatrixXd design_matrix(const std::vector<PushRecord>& records, const Standardizer& standardizer) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(records.size()), kFeatureCount + 1);
  for (std::size_t i = 0; i < records.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = design_row(records[i].features, standardizer).transpose();
  }
  return X;
}

Eigen::VectorXd labels(const std::vector<PushRecord>& records) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) y[static_cast<Eigen::Index>(i)] = records[i].f_max;
  return y;
}

AffordanceModel AffordanceModel::train(const std::vector<PushRecord>& train, const FitOptions& options) {
  AffordanceModel m;
  m.standardizer = Standardizer::fit(train);
  m.posterior = fit_batch(design_matrix(train, m.standardizer), labels(train), options);
  return m;
}

Prediction AffordanceModel::predict(const FeatureVector& x, double max_force) const {
  return pushability::predict(posterior, design_row(x, standardizer), max_force);
}

namespace {

template <class V>
nlohmann::json to_array(const V& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const nlohmann::json& a, Eigen::Index expected, const char* what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected) {
    throw ParseError(std::string("model file: '") + what + "' has the wrong length");
  }
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

}  // namespace

nlohmann::json AffordanceModel::to_json() const {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  nlohmann::json names = nlohmann::json::array();
  for (auto n : kFeatureNames) names.push_back(std::string(n));
  j["feature_names"] = names;
  nlohmann::json constant = nlohmann::json::array();
  for (bool c : standardizer.constant) constant.push_back(c);
  j["standardizer"] = {{"mean", to_array(standardizer.mean)}, {"scale", to_array(standardizer.scale)},
                       {"constant", constant}};
  j["prior_precision"] = posterior.prior_precision;
  j["noise_precision"] = posterior.noise_precision;
  j["observations"] = posterior.observations;
  j["weight_mean"] = to_array(posterior.weight_mean);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cov = posterior.weight_cov;
  j["weight_cov"] = to_array(Eigen::Map<const Eigen::VectorXd>(cov.data(), cov.size()));
  return j;
}

AffordanceModel AffordanceModel::from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) throw ParseError("model file: unsupported schema version");
    const auto names = j.at("feature_names").get<std::vector<std::string>>();
    if (names.size() != kFeatureCount) throw ParseError("model file: feature manifest has the wrong length");
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (names[i] != kFeatureNames[i]) throw ParseError("model file: unexpected feature '" + names[i] + "'");
    }
    AffordanceModel m;
    const auto& st = j.at("standardizer");
    m.standardizer.mean = vector_from(st.at("mean"), kFeatureCount, "standardizer.mean");
    m.standardizer.scale = vector_from(st.at("scale"), kFeatureCount, "standardizer.scale");
    const auto constant = st.at("constant").get<std::vector<bool>>();
    if (constant.size() != kFeatureCount) throw ParseError("model file: 'standardizer.constant' has the wrong length");
    std::copy(constant.begin(), constant.end(), m.standardizer.constant.begin());

    const Eigen::Index d = kFeatureCount + 1;
    auto& p = m.posterior;
    p.prior_precision = j.at("prior_precision").get<double>();
    p.noise_precision = j.at("noise_precision").get<double>();
    p.observations = j.value("observations", std::size_t{0});
    p.weight_mean = vector_from(j.at("weight_mean"), d, "weight_mean");
    const Eigen::VectorXd flat = vector_from(j.at("weight_cov"), d * d, "weight_cov");
    p.weight_cov = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), d, d);
    if (!(p.prior_precision > 0.0) || !(p.noise_precision > 0.0)) throw ParseError("model file: precisions must be positive");
    const Eigen::LLT<Eigen::MatrixXd> llt(p.weight_cov);
    if (llt.info() != Eigen::Success) throw ParseError("model file: weight_cov is not positive definite");
    p.precision = llt.solve(Eigen::MatrixXd::Identity(d, d));
    p.precision = 0.5 * (p.precision + p.precision.transpose());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

void AffordanceModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path.string() + "'");
  out << to_json().dump(2) << '\n';
}

AffordanceModel AffordanceModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

const GroupSummary& CoefficientReport::group(std::string_view name) const {
  for (const auto& g : groups) {
    if (g.group == name) return g;
  }
  throw DomainError("no coefficient group '" + std::string(name) + "'");
}

CoefficientReport coefficient_report(const PosteriorModel& model) {
  if (model.dim() != static_cast<Eigen::Index>(kFeatureCount + 1)) {
    throw DomainError("coefficient_report: model does not use the standard feature schema");
  }
  CoefficientReport report;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    report.coefficients.push_back(
        {std::string(kFeatureNames[i]), std::string(kFeatureGroups[i]), model.weight_mean[static_cast<Eigen::Index>(i + 1)]});
  }
  for (auto g : kGroupNames) {
    GroupSummary s{std::string(g)};
    double sq = 0.0;
    for (const auto& c : report.coefficients) {
      if (c.group != g) continue;
      sq += c.weight * c.weight;
      s.signed_sum += c.weight;
    }
    s.magnitude = std::sqrt(sq);
    report.groups.push_back(s);
  }
  return report;
}

void write_coefficients_csv(std::ostream& out, const CoefficientReport& report) {
  out << "feature,group,weight\n";
  char buf[64];
  for (const auto& c : report.coefficients) {
    std::snprintf(buf, sizeof buf, "%.9g", c.weight);
    out << c.feature << ',' << c.group << ',' << buf << '\n';
  }
}

void write_groups_csv(std::ostream& out, const CoefficientReport& report) {
  out << "group,magnitude,signed_sum\n";
  char buf[96];
  for (const auto& g : report.groups) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g", g.magnitude, g.signed_sum);
    out << g.group << ',' << buf << '\n';
  }
}

}  // namespace pushability
