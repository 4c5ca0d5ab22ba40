#pragma once

#include <Eigen/Dense>

#include <vector>

namespace robust_gait::bo
{

/// Anisotropic squared-exponential kernel plus white noise.
struct Kernel
{
  double signal_var = 1.0;
  Eigen::Vector2d lengthscales = Eigen::Vector2d::Constant(0.3);
  double noise_var = 1e-6;

  static constexpr double kNoiseFloor = 1e-8;

  /// Noise-free covariance between two inputs.
  double operator()(const Eigen::Vector2d & a, const Eigen::Vector2d & b) const;

  /// (log signal_var, log l1, log l2, log noise_var)
  Eigen::Vector4d log_params() const;
  static Kernel from_log_params(const Eigen::Vector4d & theta);
};

/// GP regression model on the unit square with a constant prior mean.
/// Immutable once built; safe to share across threads.
struct GpModel
{
  std::vector<Eigen::Vector2d> inputs; // in [0,1]^2
  Eigen::VectorXd targets;
  double prior_mean = 0.0;
  Kernel kernel;
  Eigen::MatrixXd chol_factor; // lower, L L' = K + noise_var I
  Eigen::VectorXd alpha_weights; // (K + noise_var I)^-1 (targets - prior_mean)

  int size() const { return static_cast<int>(inputs.size()); }
};

/// Factorizes the covariance for fixed hyperparameters. On Cholesky failure
/// the noise floor is raised tenfold, at most three times, before throwing
/// NumericalFailure.
GpModel gp_condition(std::vector<Eigen::Vector2d> inputs, Eigen::VectorXd targets, const Kernel & kernel);

struct LogLikelihood
{
  double value = 0.0;
  Eigen::Vector4d gradient = Eigen::Vector4d::Zero(); // w.r.t. Kernel::log_params()
};

LogLikelihood log_marginal_likelihood(const GpModel & model);

struct FitOptions
{
  int max_iterations = 60; // per start
  /// Lower bound on both lengthscales (unit-square coordinates). Features
  /// much narrower than the sample spacing cannot be resolved anyway, and
  /// shorter lengthscales turn the surrogate into a patchwork of spikes
  /// around fall/no-fall transitions.
  double min_lengthscale = 0.2;
};

struct FitReport
{
  std::vector<Eigen::Vector4d> start_points;
  std::vector<double> start_values; // log likelihood at each start
  double best_value = 0.0;
};

/// Maximizes the log marginal likelihood over kernel hyperparameters by a
/// box-bounded quasi-Newton ascent from eight deterministic starts.
GpModel gp_fit(const std::vector<Eigen::Vector2d> & inputs, const Eigen::VectorXd & targets,
               const FitOptions & options = {}, FitReport * report = nullptr);

struct Posterior
{
  double mean = 0.0;
  double var = 0.0; // latent, excludes observation noise
};

Posterior gp_posterior(const GpModel & model, const Eigen::Vector2d & x);

} // namespace robust_gait::bo
