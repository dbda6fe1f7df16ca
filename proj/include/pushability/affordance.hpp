#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "pushability/features.hpp"
#include "pushability/random.hpp"

namespace pushability {

/// Peak feedback force above which a rock cannot be moved [N].
inline constexpr double kPushLimit = 20.0;

// ---------------------------------------------------------------------------
// Force signals
// ---------------------------------------------------------------------------

/// Arm force samples [N], one 3-vector per time step.
struct ForceSignal {
  std::vector<Vec3> samples;
  std::size_t length() const noexcept { return samples.size(); }
};

/// Largest Euclidean norm over the samples. Throws DomainError when empty.
double fmax(const ForceSignal& signal);

// ---------------------------------------------------------------------------
// Bayesian linear regression
// ---------------------------------------------------------------------------

/// Gaussian posterior over regression weights with a zero-mean isotropic prior
/// N(0, lambda^-1 I) and Gaussian observation noise of precision alpha.
///
/// The precision matrix is kept alongside the covariance so that sequential
/// updates stay exact; the covariance is always its symmetrized inverse.
struct PosteriorModel {
  Eigen::VectorXd weight_mean;
  Eigen::MatrixXd weight_cov;
  Eigen::MatrixXd precision;
  double prior_precision = 1e-6;  // lambda
  double noise_precision = 1.0;   // alpha
  std::size_t observations = 0;

  Eigen::Index dim() const noexcept { return weight_mean.size(); }

  static PosteriorModel prior(Eigen::Index dim, double lambda, double alpha);
};

struct FitOptions {
  double lambda = 1e-6;
  /// Fixed noise precision; when unset, (alpha, lambda) are chosen by evidence maximization.
  std::optional<double> alpha;
  int max_iterations = 300;
  double tolerance = 1e-6;
};

/// Closed-form posterior for design matrix X (rows are observations, bias column
/// included by the caller if wanted). With an unset alpha, runs MacKay's fixed-point
/// iteration on both precisions, starting from lambda = options.lambda and alpha = 1/var(y).
PosteriorModel fit_batch(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitOptions& options = {});

/// Exact conjugate update with one observation (x, y) at the model's fixed alpha.
PosteriorModel update_sequential(const PosteriorModel& model, const Eigen::VectorXd& x, double y);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
  double p_pushable = 0.0;  // P(f_max <= max_force) under the predictive Gaussian
};

Prediction predict(const PosteriorModel& model, const Eigen::VectorXd& x, double max_force = kPushLimit);

enum class Decision { Pushable, NotPushable };

/// Pushable iff the predictive mean is at most max_force.
Decision decide(const Prediction& prediction, double max_force = kPushLimit);

std::string to_string(Decision d);

// ---------------------------------------------------------------------------
// Records and feature schema
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFeatureCount = 12;
inline constexpr int kSchemaVersion = 1;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "pos_x", "pos_y", "pos_z", "box_dx", "box_dy", "box_dz",
    "volume", "shape", "normal_x", "normal_y", "normal_z", "theta"};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureGroups = {
    "position", "position", "position", "box", "box", "box",
    "volume", "shape", "normal", "normal", "normal", "theta"};

inline constexpr std::array<std::string_view, 6> kGroupNames = {"position", "box", "volume", "shape", "normal", "theta"};

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

FeatureVector feature_vector(const ObstacleFeatures& f);

/// One training example: obstacle features and the peak force of its push.
struct PushRecord {
  FeatureVector features = FeatureVector::Zero();
  double f_max = 0.0;
  // Provenance; optional in files.
  int run = -1;
  int frame = -1;
  std::string rock;
  std::string terrain;
  double slope = 0.0;  // push-direction slope [rad]
};

nlohmann::json to_json(const PushRecord& r);
PushRecord push_record_from_json(const nlohmann::json& j);

std::vector<PushRecord> read_records(std::istream& in);
std::vector<PushRecord> load_records(const std::filesystem::path& path);
void write_records(std::ostream& out, const std::vector<PushRecord>& records);

/// Seeded Fisher-Yates shuffle; the first ceil(n * fraction) shuffled indices form the
/// test set (clamped so both sides are non-empty). Returns (train, test).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double test_fraction,
                                                                            std::uint64_t seed);

template <class T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& records, double test_fraction,
                                                        std::uint64_t seed) {
  const auto [train_idx, test_idx] = split_indices(records.size(), test_fraction, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(train_idx.size());
  out.second.reserve(test_idx.size());
  for (auto i : train_idx) out.first.push_back(records[i]);
  for (auto i : test_idx) out.second.push_back(records[i]);
  return out;
}

/// Per-feature z-scoring fit on training data (population standard deviation).
/// Constant features map to 0 and are flagged.
struct Standardizer {
  FeatureVector mean = FeatureVector::Zero();
  FeatureVector scale = FeatureVector::Ones();
  std::array<bool, kFeatureCount> constant{};

  static Standardizer fit(const std::vector<PushRecord>& records);
  FeatureVector transform(const FeatureVector& x) const;
  FeatureVector inverse(const FeatureVector& z) const;
};

/// Standardized features with a leading bias column of ones.
Eigen::MatrixXd design_matrix(const std::vector<PushRecord>& records, const Standardizer& standardizer);
Eigen::VectorXd design_row(const FeatureVector& x, const Standardizer& standardizer);
Eigen::VectorXd labels(const std::vector<PushRecord>& records);

/// Standardizer plus posterior: the full learned affordance model.
struct AffordanceModel {
  Standardizer standardizer;
  PosteriorModel posterior;

  static AffordanceModel train(const std::vector<PushRecord>& train, const FitOptions& options = {});

  Prediction predict(const FeatureVector& x, double max_force = kPushLimit) const;

  nlohmann::json to_json() const;
  static AffordanceModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static AffordanceModel load(const std::filesystem::path& path);
};

struct CoefficientEntry {
  std::string feature;
  std::string group;
  double weight = 0.0;
};

struct GroupSummary {
  std::string group;
  double magnitude = 0.0;   // L2 norm of the group's weights
  double signed_sum = 0.0;  // sum of the group's weights
};

struct CoefficientReport {
  std::vector<CoefficientEntry> coefficients;
  std::vector<GroupSummary> groups;

  const GroupSummary& group(std::string_view name) const;
};

/// Standardized weights per feature (bias excluded) and their group summaries.
CoefficientReport coefficient_report(const PosteriorModel& model);

void write_coefficients_csv(std::ostream& out, const CoefficientReport& report);
void write_groups_csv(std::ostream& out, const CoefficientReport& report);

}  // namespace pushability
