#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "pushability/affordance.hpp"
#include "pushability/errors.hpp"

namespace pushability {
namespace {

constexpr double kMinPrecision = 1e-10;
constexpr double kMaxPrecision = 1e10;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Fills mean/cov from the precision matrix and the right-hand side precision * mean.
void solve_posterior(PosteriorModel& model, const Eigen::VectorXd& rhs) {
  const Eigen::LLT<Eigen::MatrixXd> llt(model.precision);
  if (llt.info() != Eigen::Success) throw DomainError("posterior precision is not positive definite");
  model.weight_mean = llt.solve(rhs);
  model.weight_cov = symmetrized(llt.solve(Eigen::MatrixXd::Identity(model.dim(), model.dim())));
}

}  // namespace

double fmax(const ForceSignal& signal) {
  if (signal.samples.empty()) throw DomainError("fmax: empty force signal");
  double best = 0.0;
  for (const Vec3& f : signal.samples) {
    if (!f.allFinite()) throw DomainError("fmax: non-finite force sample");
    best = std::max(best, f.norm());
  }
  return best;
}

PosteriorModel PosteriorModel::prior(Eigen::Index dim, double lambda, double alpha) {
  if (!(lambda > 0.0) || !(alpha > 0.0)) throw DomainError("prior: precisions must be positive");
  PosteriorModel m;
  m.prior_precision = lambda;
  m.noise_precision = alpha;
  m.weight_mean = Eigen::VectorXd::Zero(dim);
  m.precision = lambda * Eigen::MatrixXd::Identity(dim, dim);
  m.weight_cov = (1.0 / lambda) * Eigen::MatrixXd::Identity(dim, dim);
  return m;
}

PosteriorModel fit_batch(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const FitOptions& options) {
  if (X.rows() != y.size()) throw DomainError("fit_batch: row count of X does not match y");
  if (!(options.lambda > 0.0)) throw DomainError("fit_batch: lambda must be positive");
  if (options.alpha && !(*options.alpha > 0.0)) throw DomainError("fit_batch: alpha must be positive");
  const Eigen::Index d = X.cols();
  const auto n = static_cast<double>(X.rows());

  double lambda = options.lambda;
  double alpha = options.alpha.value_or(1.0);
  const Eigen::MatrixXd gram = X.transpose() * X;
  const Eigen::VectorXd xty = X.transpose() * y;

  if (!options.alpha && X.rows() > 0) {
    const double mean_y = y.mean();
    const double var_y = (y.array() - mean_y).square().mean();
    alpha = var_y > 0.0 ? 1.0 / var_y : 1.0;

    // MacKay fixed point in the eigenbasis of X^T X.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd& V = eig.eigenvectors();
    const Eigen::VectorXd vty = V.transpose() * xty;
    for (int it = 0; it < options.max_iterations; ++it) {
      const Eigen::VectorXd denom = (lambda + alpha * ev.array()).matrix();
      const Eigen::VectorXd mean = V * (alpha * vty.cwiseQuotient(denom));
      const double gamma = (alpha * ev.array() / denom.array()).sum();
      const double rss = (y - X * mean).squaredNorm();
      const double lambda_next =
          std::clamp(gamma / std::max(mean.squaredNorm(), 1e-300), kMinPrecision, kMaxPrecision);
      const double alpha_next =
          std::clamp(std::max(n - gamma, 1e-12) / std::max(rss, 1e-300), kMinPrecision, kMaxPrecision);
      const bool done = std::abs(alpha_next - alpha) <= options.tolerance * alpha &&
                        std::abs(lambda_next - lambda) <= options.tolerance * lambda;
      alpha = alpha_next;
      lambda = lambda_next;
      if (done) break;
    }
  }

  PosteriorModel model = PosteriorModel::prior(d, lambda, alpha);
  if (X.rows() == 0) return model;
  model.precision += alpha * gram;
  model.observations = static_cast<std::size_t>(X.rows());
  solve_posterior(model, alpha * xty);
  return model;
}

PosteriorModel update_sequential(const PosteriorModel& model, const Eigen::VectorXd& x, double y) {
  if (x.size() != model.dim()) throw DomainError("update_sequential: feature dimension mismatch");
  PosteriorModel next = model;
  const double alpha = model.noise_precision;
  const Eigen::VectorXd rhs = model.precision * model.weight_mean + alpha * y * x;
  next.precision.noalias() += alpha * x * x.transpose();
  next.observations = model.observations + 1;
  solve_posterior(next, rhs);
  return next;
}

Prediction predict(const PosteriorModel& model, const Eigen::VectorXd& x, double max_force) {
  if (x.size() != model.dim()) throw DomainError("predict: feature dimension mismatch");
  Prediction p;
  p.mean = model.weight_mean.dot(x);
  p.variance = 1.0 / model.noise_precision + std::max(0.0, x.dot(model.weight_cov * x));
  const double z = (max_force - p.mean) / std::sqrt(p.variance);
  p.p_pushable = 0.5 * std::erfc(-z / std::sqrt(2.0));
  return p;
}

Decision decide(const Prediction& prediction, double max_force) {
  return prediction.mean <= max_force ? Decision::Pushable : Decision::NotPushable;
}

std::string to_string(Decision d) { return d == Decision::Pushable ? "Pushable" : "NotPushable"; }

}  // namespace pushability
