#pragma once

#include "robust_gait/footstep.hpp"
#include "robust_gait/lipm.hpp"
#include "robust_gait/qp_solver.hpp"

#include <Eigen/Dense>

#include <vector>

namespace robust_gait::qp
{

/// Cost weights of the walking pattern generator: velocity tracking (alpha),
/// ZMP centring (beta) and required friction (gamma).
struct Weights
{
  double alpha = 1.0;
  double beta = 1000.0;
  double gamma = 1000.0;

  static constexpr double kMax = 1000.0;
  void validate() const;
};

/// Condensed prediction of one axis over N samples. Row k is the state after
/// k + 1 jerk inputs:  quantity = from_state * x0 + from_jerk * u.
struct AxisPrediction
{
  Eigen::MatrixXd pos_state, vel_state, acc_state, zmp_state; // N x 3
  Eigen::MatrixXd pos_jerk, vel_jerk, acc_jerk, zmp_jerk; // N x N
};

AxisPrediction condense(const lipm::LipParams & params, int n_samples);

constexpr double kHessianRegularization = 1e-9;

/// Assembles the walking QP over jerk sequences and footstep positions.
/// `v_ref` has one row per horizon sample. `mu_design` bounds the planned
/// acceleration through the inscribed box of the friction cone.
QpProblem build_qp(const Weights & weights, const lipm::LipState & init, const Eigen::MatrixX2d & v_ref,
                   const footstep::FootstepPlanTemplate & plan, const footstep::FootGeometry & geom,
                   const lipm::LipParams & params, double mu_design);

/// Unweighted cost terms summed over the horizon and both axes.
struct CostTerms
{
  double velocity = 0.0; // sum |v - v_ref|^2
  double zmp = 0.0; // sum |Z - Zref|^2
  double rcof = 0.0; // sum mu^2
};

CostTerms cost_terms(const QpProblem & problem, const Eigen::VectorXd & x, double gravity);

struct GaitPlan
{
  Eigen::MatrixX2d jerks; // N x 2
  Eigen::MatrixX2d footsteps; // M x 2
  std::vector<lipm::LipState> predicted_com; // N
  Eigen::MatrixX2d predicted_zmp; // N x 2
  Eigen::VectorXd predicted_rcof; // N
};

/// Decodes the decision vector and forward-propagates the jerks from `init`.
GaitPlan extract_plan(const QpSolution & solution, const QpProblem & problem, const lipm::LipState & init,
                      const lipm::LipParams & params);

} // namespace robust_gait::qp
