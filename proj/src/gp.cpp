#include "robust_gait/gp.hpp"

#include "robust_gait/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace robust_gait::bo
{

namespace
{

Eigen::MatrixXd covariance(const std::vector<Eigen::Vector2d> & x, const Kernel & k)
{
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd K(n, n);
  for(Eigen::Index i = 0; i < n; ++i)
  {
    K(i, i) = k.signal_var;
    for(Eigen::Index j = 0; j < i; ++j)
    {
      K(i, j) = k(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
      K(j, i) = K(i, j);
    }
  }
  return K;
}

/// Factorization without the noise-floor retry; empty on failure.
std::optional<GpModel> try_condition(const std::vector<Eigen::Vector2d> & inputs, const Eigen::VectorXd & targets,
                                     const Kernel & kernel)
{
  GpModel m;
  m.inputs = inputs;
  m.targets = targets;
  m.kernel = kernel;
  m.kernel.noise_var = std::max(kernel.noise_var, Kernel::kNoiseFloor);
  m.prior_mean = targets.size() ? targets.mean() : 0.0;
  Eigen::MatrixXd K = covariance(inputs, m.kernel);
  K.diagonal().array() += m.kernel.noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if(llt.info() != Eigen::Success) return std::nullopt;
  m.chol_factor = llt.matrixL();
  if(!m.chol_factor.allFinite() || (m.chol_factor.diagonal().array() <= 0.0).any()) return std::nullopt;
  m.alpha_weights = llt.solve(Eigen::VectorXd(targets.array() - m.prior_mean));
  return m;
}

struct Box4
{
  Eigen::Vector4d lo;
  Eigen::Vector4d hi;
  Eigen::Vector4d clamp(const Eigen::Vector4d & t) const { return t.cwiseMax(lo).cwiseMin(hi); }
};

Box4 hyper_bounds(const Eigen::VectorXd & targets, double min_lengthscale)
{
  double scale = 1e-4;
  if(targets.size() > 1)
  {
    const double var = (targets.array() - targets.mean()).square().sum() / static_cast<double>(targets.size());
    scale = std::max(scale, var);
  }
  Box4 b;
  b.lo << std::log(1e-3 * scale), std::log(min_lengthscale), std::log(min_lengthscale), std::log(Kernel::kNoiseFloor);
  b.hi << std::log(1e2 * scale), std::log(5.0), std::log(5.0), std::log(scale);
  return b;
}

double evaluate(const std::vector<Eigen::Vector2d> & inputs, const Eigen::VectorXd & targets,
                const Eigen::Vector4d & theta, Eigen::Vector4d * gradient)
{
  const auto model = try_condition(inputs, targets, Kernel::from_log_params(theta));
  if(!model) return -std::numeric_limits<double>::infinity();
  const LogLikelihood ll = log_marginal_likelihood(*model);
  if(gradient) *gradient = ll.gradient;
  return std::isfinite(ll.value) ? ll.value : -std::numeric_limits<double>::infinity();
}

/// Projected BFGS ascent inside the box. Never returns a point worse than the start.
Eigen::Vector4d ascend(const std::vector<Eigen::Vector2d> & inputs, const Eigen::VectorXd & targets,
                       Eigen::Vector4d theta, const Box4 & box, int max_iterations, double & value)
{
  Eigen::Vector4d grad;
  value = evaluate(inputs, targets, theta, &grad);
  if(!std::isfinite(value)) return theta;
  Eigen::Matrix4d inv_hess = Eigen::Matrix4d::Identity();

  for(int it = 0; it < max_iterations; ++it)
  {
    // variables pinned at a bound with the gradient pointing outwards stay fixed
    Eigen::Vector4d free = Eigen::Vector4d::Ones();
    for(int i = 0; i < 4; ++i)
    {
      if((theta[i] <= box.lo[i] && grad[i] < 0.0) || (theta[i] >= box.hi[i] && grad[i] > 0.0)) free[i] = 0.0;
    }
    const Eigen::Vector4d g_free = grad.cwiseProduct(free);
    if(g_free.norm() < 1e-7) break;

    Eigen::Vector4d dir = (inv_hess * g_free).cwiseProduct(free);
    if(dir.dot(g_free) <= 0.0)
    {
      inv_hess.setIdentity();
      dir = g_free;
    }
    // keep log-space steps moderate
    const double max_step = dir.cwiseAbs().maxCoeff();
    if(max_step > 2.0) dir *= 2.0 / max_step;

    double step = 1.0;
    bool accepted = false;
    Eigen::Vector4d trial;
    Eigen::Vector4d trial_grad;
    double trial_value = value;
    for(int ls = 0; ls < 30; ++ls)
    {
      trial = box.clamp(theta + step * dir);
      trial_value = evaluate(inputs, targets, trial, &trial_grad);
      if(std::isfinite(trial_value) && trial_value >= value + 1e-4 * grad.dot(trial - theta))
      {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if(!accepted) break;

    const Eigen::Vector4d s = trial - theta;
    const Eigen::Vector4d y = grad - trial_grad; // curvature of the negated objective
    const double sy = s.dot(y);
    const double gain = trial_value - value;
    theta = trial;
    grad = trial_grad;
    value = trial_value;
    if(sy > 1e-12)
    {
      const double rho = 1.0 / sy;
      const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();
      inv_hess = (I - rho * s * y.transpose()) * inv_hess * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if(s.norm() < 1e-9 || gain < 1e-10) break;
  }
  return theta;
}

} // namespace

double Kernel::operator()(const Eigen::Vector2d & a, const Eigen::Vector2d & b) const
{
  const Eigen::Vector2d d = (a - b).cwiseQuotient(lengthscales);
  return signal_var * std::exp(-0.5 * d.squaredNorm());
}

Eigen::Vector4d Kernel::log_params() const
{
  return {std::log(signal_var), std::log(lengthscales[0]), std::log(lengthscales[1]), std::log(noise_var)};
}

Kernel Kernel::from_log_params(const Eigen::Vector4d & theta)
{
  Kernel k;
  k.signal_var = std::exp(theta[0]);
  k.lengthscales = {std::exp(theta[1]), std::exp(theta[2])};
  k.noise_var = std::exp(theta[3]);
  return k;
}

GpModel gp_condition(std::vector<Eigen::Vector2d> inputs, Eigen::VectorXd targets, const Kernel & kernel)
{
  if(static_cast<Eigen::Index>(inputs.size()) != targets.size())
    throw InvalidParameter("GP inputs and targets differ in length");
  if(!(kernel.signal_var > 0.0) || !(kernel.lengthscales.array() > 0.0).all())
    throw InvalidParameter("GP kernel parameters must be positive");
  Kernel k = kernel;
  for(int attempt = 0; attempt <= 3; ++attempt)
  {
    if(auto m = try_condition(inputs, targets, k)) return std::move(*m);
    k.noise_var = std::max(k.noise_var, Kernel::kNoiseFloor) * 10.0;
  }
  throw NumericalFailure("GP covariance is not positive definite even after raising the noise floor");
}

LogLikelihood log_marginal_likelihood(const GpModel & model)
{
  const Eigen::Index n = model.size();
  LogLikelihood out;
  const Eigen::VectorXd centred = model.targets.array() - model.prior_mean;
  out.value = -0.5 * centred.dot(model.alpha_weights) - model.chol_factor.diagonal().array().log().sum()
              - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  // W = alpha alpha' - K^-1 ; dL/dtheta_j = 0.5 tr(W dK/dtheta_j)
  const auto L = model.chol_factor.triangularView<Eigen::Lower>();
  Eigen::MatrixXd k_inv = L.solve(Eigen::MatrixXd::Identity(n, n));
  k_inv = L.transpose().solve(k_inv);
  const Eigen::MatrixXd W = model.alpha_weights * model.alpha_weights.transpose() - k_inv;

  const Kernel & k = model.kernel;
  for(Eigen::Index i = 0; i < n; ++i)
  {
    for(Eigen::Index j = 0; j < n; ++j)
    {
      const Eigen::Vector2d & xi = model.inputs[static_cast<std::size_t>(i)];
      const Eigen::Vector2d & xj = model.inputs[static_cast<std::size_t>(j)];
      const double kf = k(xi, xj);
      out.gradient[0] += 0.5 * W(i, j) * kf;
      for(int d = 0; d < 2; ++d)
      {
        const double r = (xi[d] - xj[d]) / k.lengthscales[d];
        out.gradient[1 + d] += 0.5 * W(i, j) * kf * r * r;
      }
    }
    out.gradient[3] += 0.5 * W(i, i) * k.noise_var;
  }
  return out;
}

GpModel gp_fit(const std::vector<Eigen::Vector2d> & inputs, const Eigen::VectorXd & targets,
               const FitOptions & options, FitReport * report)
{
  if(inputs.size() < 2) throw InvalidParameter("gp_fit needs at least two samples");
  if(static_cast<Eigen::Index>(inputs.size()) != targets.size())
    throw InvalidParameter("GP inputs and targets differ in length");
  if(!targets.allFinite()) throw InvalidParameter("GP targets must be finite");
  if(!(options.min_lengthscale > 0.0 && options.min_lengthscale < 5.0))
    throw InvalidParameter("min_lengthscale must lie in (0, 5)");

  const Box4 box = hyper_bounds(targets, options.min_lengthscale);
  const double scale = std::exp(box.hi[3]);
  std::vector<Eigen::Vector4d> starts;
  for(double l1 : {0.15, 0.6})
    for(double l2 : {0.15, 0.6})
      for(double noise : {1e-3, 1e-6})
      {
        Eigen::Vector4d t(std::log(scale), std::log(l1), std::log(l2), std::log(std::max(noise * scale, 1e-8)));
        starts.push_back(box.clamp(t));
      }

  if(report) *report = FitReport{};
  double best_value = -std::numeric_limits<double>::infinity();
  Eigen::Vector4d best_theta = starts.front();
  for(const Eigen::Vector4d & start : starts)
  {
    if(report)
    {
      report->start_points.push_back(start);
      report->start_values.push_back(evaluate(inputs, targets, start, nullptr));
    }
    double value = 0.0;
    const Eigen::Vector4d theta = ascend(inputs, targets, start, box, options.max_iterations, value);
    if(value > best_value)
    {
      best_value = value;
      best_theta = theta;
    }
  }
  if(report) report->best_value = best_value;
  return gp_condition(inputs, targets, Kernel::from_log_params(best_theta));
}

Posterior gp_posterior(const GpModel & model, const Eigen::Vector2d & x)
{
  const Eigen::Index n = model.size();
  Eigen::VectorXd k_star(n);
  for(Eigen::Index i = 0; i < n; ++i) k_star[i] = model.kernel(model.inputs[static_cast<std::size_t>(i)], x);
  Posterior p;
  p.mean = model.prior_mean + k_star.dot(model.alpha_weights);
  const Eigen::VectorXd v = model.chol_factor.triangularView<Eigen::Lower>().solve(k_star);
  p.var = std::max(0.0, model.kernel.signal_var - v.squaredNorm());
  return p;
}

} // namespace robust_gait::bo
