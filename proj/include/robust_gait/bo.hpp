#pragma once

#include "robust_gait/gp.hpp"
#include "robust_gait/plant.hpp"
#include "robust_gait/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace robust_gait::bo
{

/// Penalty parameters of the outer objective.
struct OuterCostParams
{
  double lambda = 100.0;
  double h_des = 0.8; // [m]
  double threshold = 0.05; // [m]
};

/// Velocity tracking error summed over every control sample of the episode
/// plus lambda * max(|h_terminal - h_des| - threshold, 0). Samples after a
/// fall count as standing still. `v_des_series` fixes the episode length.
double outer_cost(const plant::RolloutResult & rollout, const std::vector<Eigen::Vector2d> & v_des_series,
                  const OuterCostParams & params);

/// Fall penalty phi(h) = max(|h - h_des| - threshold, 0).
double fall_penalty(double h_terminal, double h_des, double threshold);

/// Rectangle of admissible (beta, gamma).
struct WeightBounds
{
  Eigen::Vector2d lower = Eigen::Vector2d::Zero();
  Eigen::Vector2d upper = Eigen::Vector2d::Constant(1000.0);

  Eigen::Vector2d to_unit(const Eigen::Vector2d & delta) const;
  Eigen::Vector2d from_unit(const Eigen::Vector2d & u) const;
  void validate() const;
};

struct ObjectiveValue
{
  double J = 0.0;
  bool fell = false;
};

/// (beta, gamma) -> outer cost. Must be a pure function for grid fan-out.
using Objective = std::function<ObjectiveValue(const Eigen::Vector2d & delta)>;

struct ObjectiveSample
{
  Eigen::Vector2d delta = Eigen::Vector2d::Zero(); // (beta, gamma)
  double J = 0.0;
  bool fell = false;
  bool capped = false; // objective returned a non-finite value
  int eval_index = 0;
};

struct TuneHistory
{
  std::vector<ObjectiveSample> samples;
  std::vector<double> min_so_far;
  Eigen::Vector2d best_delta = Eigen::Vector2d::Zero();
  double best_J = 0.0;

  void push(const ObjectiveSample & s);
};

constexpr double kPenaltyCap = 1e6;

/// Target warp applied before GP regression; strictly increasing.
inline double warp(double J) { return std::log1p(std::max(J, 0.0)); }

/// GP on warped targets over unit-normalized samples.
GpModel fit_history(const std::vector<ObjectiveSample> & samples, const WeightBounds & bounds);

double normal_cdf(double z);
double normal_pdf(double z);

/// Expected improvement below `best` (minimization).
double expected_improvement(const GpModel & model, const Eigen::Vector2d & x, double best);

struct ProposalOptions
{
  int candidates = 4096;
  int refine_steps = 50;
  double refine_step0 = 0.05;
  bool parallel = true;
};

/// Maximizes EI over seeded quasi-random candidates, then refines by
/// coordinate search. Returns a point of the unit square.
Eigen::Vector2d propose_next(const GpModel & model, RandomStream & rng, const ProposalOptions & options = {});

/// Halton (2, 3) points shifted modulo 1 by a random offset.
std::vector<Eigen::Vector2d> shifted_halton(int count, RandomStream & rng);

/// Latin hypercube sample of `count` points in the unit square.
std::vector<Eigen::Vector2d> latin_hypercube(int count, RandomStream & rng);

struct TuneOptions
{
  int budget = 50;
  int init_points = 5;
  std::uint64_t seed = 7;
  WeightBounds bounds;
  ProposalOptions proposal;
};

/// Bayesian optimization of the cost weights. Evaluates the upper corner of
/// the bounds first (beta = gamma = 1000 by default), then init_points - 1
/// Latin-hypercube points, then EI proposals until the budget is spent.
TuneHistory tune(const Objective & objective, const TuneOptions & options);

} // namespace robust_gait::bo
