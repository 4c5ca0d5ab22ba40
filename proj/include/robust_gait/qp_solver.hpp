#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace robust_gait::qp
{

/// Layout of the gait decision vector: [jerk_x (N), jerk_y (N), foot_x (M), foot_y (M)].
struct VarMap
{
  int n_samples = 0;
  int n_footsteps = 0;

  int jerk(int axis) const { return axis * n_samples; }
  int foot(int axis) const { return 2 * n_samples + axis * n_footsteps; }
  int size() const { return 2 * (n_samples + n_footsteps); }
};

/// Linear map x -> matrix * x + offset.
struct AffineMap
{
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;

  Eigen::VectorXd operator()(const Eigen::VectorXd & x) const { return matrix * x + offset; }
};

/// minimize 0.5 x'Hx + g'x + constant  s.t.  lower <= A x <= upper
///
/// Bounds may be +-infinity. For gait problems `var_map` and the prediction
/// maps are filled in by build_qp; a generic problem leaves them empty.
struct QpProblem
{
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  double constant = 0.0;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_lower;
  Eigen::VectorXd ineq_upper;

  VarMap var_map;
  AffineMap velocity_error; // 2N rows, x block then y block
  AffineMap zmp; // 2N rows
  AffineMap zmp_error; // Z - Zref, 2N rows
  AffineMap acceleration; // 2N rows

  int n() const { return static_cast<int>(gradient.size()); }
  int m() const { return static_cast<int>(ineq_matrix.rows()); }
  double objective(const Eigen::VectorXd & x) const;
  void validate() const;
};

enum class QpStatus
{
  optimal,
  max_iter,
  infeasible
};

std::string to_string(QpStatus s);

struct QpSolution
{
  Eigen::VectorXd x;
  /// Signed multipliers: > 0 upper bound active, < 0 lower bound active.
  Eigen::VectorXd multipliers;
  std::vector<int> active_set;
  double objective = 0.0;
  double kkt_residual = 0.0; // |Hx + g + A'lambda|_inf
  double primal_residual = 0.0; // max bound violation
  double complementarity = 0.0; // max |lambda_i * slack_i|
  int iterations = 0;
  QpStatus status = QpStatus::infeasible;
};

struct SolverOptions
{
  /// Iteration cap is factor * (n + m).
  int iteration_factor = 10;
  /// A constraint is considered violated above this (scaled by 1 + |bound|).
  double violation_tol = 1e-11;
};

/// Dense two-phase active-set solver. A feasible start is found by projecting
/// the unconstrained minimizer onto the constraint set (dual method on an
/// identity Hessian, which also detects infeasibility); a primal active-set
/// method then converges to the optimum. The Hessian must be positive definite.
QpSolution solve_qp(const QpProblem & problem, const SolverOptions & options = {});

/// Evaluates the three KKT residuals of (x, multipliers) and fills them in.
void certify(const QpProblem & problem, QpSolution & sol);

} // namespace robust_gait::qp
