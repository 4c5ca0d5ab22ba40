#include "robust_gait/bo.hpp"

#include "robust_gait/errors.hpp"
#include "robust_gait/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace robust_gait::bo
{

namespace
{

double radical_inverse(unsigned index, unsigned base)
{
  double result = 0.0;
  double f = 1.0 / base;
  while(index > 0)
  {
    result += f * (index % base);
    index /= base;
    f /= base;
  }
  return result;
}

double frac(double v)
{
  return v - std::floor(v);
}

} // namespace

double fall_penalty(double h_terminal, double h_des, double threshold)
{
  return std::max(std::abs(h_terminal - h_des) - threshold, 0.0);
}

double outer_cost(const plant::RolloutResult & rollout, const std::vector<Eigen::Vector2d> & v_des_series,
                  const OuterCostParams & params)
{
  if(!(params.lambda >= 0.0) || !(params.threshold >= 0.0))
    throw InvalidParameter("lambda and threshold must be non-negative");
  double tracking = 0.0;
  for(std::size_t i = 0; i < v_des_series.size(); ++i)
  {
    const Eigen::Vector2d v = i < rollout.measured_vel.size() ? rollout.measured_vel[i] : Eigen::Vector2d::Zero();
    tracking += (v - v_des_series[i]).squaredNorm();
  }
  return tracking + params.lambda * fall_penalty(rollout.h_terminal, params.h_des, params.threshold);
}

Eigen::Vector2d WeightBounds::to_unit(const Eigen::Vector2d & delta) const
{
  return (delta - lower).cwiseQuotient(upper - lower);
}

Eigen::Vector2d WeightBounds::from_unit(const Eigen::Vector2d & u) const
{
  return lower + u.cwiseProduct(upper - lower);
}

void WeightBounds::validate() const
{
  for(int d = 0; d < 2; ++d)
  {
    if(!(lower[d] >= 0.0 && upper[d] <= 1000.0 && lower[d] < upper[d]))
      throw InvalidParameter("weight bounds must satisfy 0 <= lower < upper <= 1000");
  }
}

void TuneHistory::push(const ObjectiveSample & s)
{
  if(samples.empty() || s.J < best_J)
  {
    best_J = s.J;
    best_delta = s.delta;
  }
  samples.push_back(s);
  min_so_far.push_back(best_J);
}

GpModel fit_history(const std::vector<ObjectiveSample> & samples, const WeightBounds & bounds)
{
  std::vector<Eigen::Vector2d> x;
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  x.reserve(samples.size());
  for(std::size_t i = 0; i < samples.size(); ++i)
  {
    x.push_back(bounds.to_unit(samples[i].delta));
    y[static_cast<Eigen::Index>(i)] = warp(samples[i].J);
  }
  return gp_fit(x, y);
}

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z)
{
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double expected_improvement(const GpModel & model, const Eigen::Vector2d & x, double best)
{
  const Posterior p = gp_posterior(model, x);
  const double s = std::sqrt(p.var);
  const double gain = best - p.mean;
  if(s <= 0.0) return std::max(gain, 0.0);
  const double z = gain / s;
  return std::max(0.0, gain * normal_cdf(z) + s * normal_pdf(z));
}

std::vector<Eigen::Vector2d> shifted_halton(int count, RandomStream & rng)
{
  const Eigen::Vector2d shift(rng.uniform(), rng.uniform());
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(count));
  for(int i = 0; i < count; ++i)
  {
    const auto idx = static_cast<unsigned>(i + 1);
    out.emplace_back(frac(radical_inverse(idx, 2) + shift[0]), frac(radical_inverse(idx, 3) + shift[1]));
  }
  return out;
}

std::vector<Eigen::Vector2d> latin_hypercube(int count, RandomStream & rng)
{
  std::vector<Eigen::Vector2d> out(static_cast<std::size_t>(count));
  for(int d = 0; d < 2; ++d)
  {
    std::vector<int> perm(static_cast<std::size_t>(count));
    std::iota(perm.begin(), perm.end(), 0);
    for(int i = count - 1; i > 0; --i)
    {
      const auto j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    for(int i = 0; i < count; ++i)
      out[static_cast<std::size_t>(i)][d] = (perm[static_cast<std::size_t>(i)] + rng.uniform()) / count;
  }
  return out;
}

Eigen::Vector2d propose_next(const GpModel & model, RandomStream & rng, const ProposalOptions & options)
{
  if(model.size() == 0) throw InvalidParameter("propose_next needs a fitted model");
  const double best = model.targets.minCoeff();
  const std::vector<Eigen::Vector2d> candidates = shifted_halton(options.candidates, rng);
  std::vector<double> ei(candidates.size());
  if(options.parallel)
    par::expected_improvement_scan(model, candidates, best, ei);
  else
    par::expected_improvement_scan_serial(model, candidates, best, ei);

  const auto top = static_cast<std::size_t>(std::distance(ei.begin(), std::max_element(ei.begin(), ei.end())));
  if(!(ei[top] > 0.0))
  {
    // no candidate promises anything: explore the emptiest spot
    std::size_t far = 0;
    double far_dist = -1.0;
    for(std::size_t i = 0; i < candidates.size(); ++i)
    {
      double nearest = std::numeric_limits<double>::infinity();
      for(const auto & x : model.inputs) nearest = std::min(nearest, (candidates[i] - x).squaredNorm());
      if(nearest > far_dist)
      {
        far_dist = nearest;
        far = i;
      }
    }
    return candidates[far];
  }

  Eigen::Vector2d x = candidates[top];
  double value = ei[top];
  double step = options.refine_step0;
  for(int it = 0; it < options.refine_steps; ++it)
  {
    Eigen::Vector2d best_move = x;
    double best_value = value;
    for(int d = 0; d < 2; ++d)
    {
      for(double sign : {1.0, -1.0})
      {
        Eigen::Vector2d trial = x;
        trial[d] = std::clamp(trial[d] + sign * step, 0.0, 1.0);
        const double v = expected_improvement(model, trial, best);
        if(v > best_value)
        {
          best_value = v;
          best_move = trial;
        }
      }
    }
    if(best_value > value)
    {
      x = best_move;
      value = best_value;
    }
    else
    {
      step *= 0.5;
    }
  }
  return x;
}

TuneHistory tune(const Objective & objective, const TuneOptions & options)
{
  options.bounds.validate();
  if(options.init_points < 1) throw InvalidParameter("init_points must be at least 1");
  if(options.budget < options.init_points + 1) throw InvalidParameter("budget must exceed init_points");

  TuneHistory history;
  RandomStream rng(options.seed);

  auto evaluate = [&](const Eigen::Vector2d & delta) {
    ObjectiveSample s;
    s.delta = delta;
    s.eval_index = static_cast<int>(history.samples.size());
    const ObjectiveValue v = objective(delta);
    s.fell = v.fell;
    s.J = v.J;
    if(!std::isfinite(s.J))
    {
      s.J = kPenaltyCap;
      s.capped = true;
    }
    history.push(s);
  };

  evaluate(options.bounds.upper);
  for(const auto & u : latin_hypercube(options.init_points - 1, rng)) evaluate(options.bounds.from_unit(u));

  while(static_cast<int>(history.samples.size()) < options.budget)
  {
    const GpModel model = fit_history(history.samples, options.bounds);
    RandomStream stream(rng.next_u64());
    const Eigen::Vector2d u = propose_next(model, stream, options.proposal);
    evaluate(options.bounds.from_unit(u));
  }
  return history;
}

} // namespace robust_gait::bo
