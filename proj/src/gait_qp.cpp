#include "robust_gait/gait_qp.hpp"

#include "robust_gait/errors.hpp"

#include <cmath>
#include <string>

namespace robust_gait::qp
{

void Weights::validate() const
{
  if(!(alpha > 0.0)) throw InvalidParameter("alpha must be positive");
  if(!(beta >= 0.0 && beta <= kMax) || !(gamma >= 0.0 && gamma <= kMax))
    throw InvalidParameter("beta and gamma must lie in [0, 1000]");
}

AxisPrediction condense(const lipm::LipParams & params, int n_samples)
{
  const lipm::AxisTransition tr = lipm::discretize(params, params.dt_plan);
  const int n = n_samples;
  AxisPrediction p;
  p.pos_state.resize(n, 3);
  p.vel_state.resize(n, 3);
  p.acc_state.resize(n, 3);
  p.pos_jerk = Eigen::MatrixXd::Zero(n, n);
  p.vel_jerk = Eigen::MatrixXd::Zero(n, n);
  p.acc_jerk = Eigen::MatrixXd::Zero(n, n);

  // impulse[j] = A^j B
  std::vector<Eigen::Vector3d> impulse(static_cast<std::size_t>(n));
  impulse[0] = tr.input_vector;
  for(int j = 1; j < n; ++j) impulse[static_cast<std::size_t>(j)] = tr.state_matrix * impulse[static_cast<std::size_t>(j) - 1];

  Eigen::Matrix3d power = tr.state_matrix;
  for(int k = 0; k < n; ++k)
  {
    p.pos_state.row(k) = power.row(0);
    p.vel_state.row(k) = power.row(1);
    p.acc_state.row(k) = power.row(2);
    for(int j = 0; j <= k; ++j)
    {
      const Eigen::Vector3d & col = impulse[static_cast<std::size_t>(k - j)];
      p.pos_jerk(k, j) = col[0];
      p.vel_jerk(k, j) = col[1];
      p.acc_jerk(k, j) = col[2];
    }
    power = tr.state_matrix * power;
  }
  const double h_over_g = params.com_height / params.gravity;
  p.zmp_state = p.pos_state - h_over_g * p.acc_state;
  p.zmp_jerk = p.pos_jerk - h_over_g * p.acc_jerk;
  return p;
}

QpProblem build_qp(const Weights & weights, const lipm::LipState & init, const Eigen::MatrixX2d & v_ref,
                   const footstep::FootstepPlanTemplate & plan, const footstep::FootGeometry & geom,
                   const lipm::LipParams & params, double mu_design)
{
  weights.validate();
  params.validate();
  const int N = plan.n_samples;
  const int M = plan.n_free();
  if(N < 1 || M < 0) throw InvalidParameter("footstep template is empty");
  if(v_ref.rows() != N)
    throw InvalidParameter("v_ref has " + std::to_string(v_ref.rows()) + " rows, horizon has " + std::to_string(N));
  if(!(mu_design > 0.0)) throw InvalidParameter("mu_design must be positive");
  if(!init.is_finite() || !v_ref.allFinite()) throw InvalidParameter("non-finite initial state or reference");

  const AxisPrediction pred = condense(params, N);
  const footstep::ZmpReferenceMap zref = footstep::zmp_reference(plan);

  QpProblem qp;
  qp.var_map = VarMap{N, M};
  const int n = qp.var_map.size();
  const int m = 4 * N + 2 * M;
  qp.hessian = Eigen::MatrixXd::Zero(n, n);
  qp.gradient = Eigen::VectorXd::Zero(n);
  qp.ineq_matrix = Eigen::MatrixXd::Zero(m, n);
  qp.ineq_lower.resize(m);
  qp.ineq_upper.resize(m);
  for(AffineMap * map : {&qp.velocity_error, &qp.zmp, &qp.zmp_error, &qp.acceleration})
  {
    map->matrix = Eigen::MatrixXd::Zero(2 * N, n);
    map->offset = Eigen::VectorXd::Zero(2 * N);
  }

  const double g = params.gravity;
  const double acc_cap = mu_design * g / std::sqrt(2.0);
  const Eigen::Vector2d polygon_half(geom.half_length, geom.half_width);
  const Eigen::Vector2d reach_half(geom.reach_half_x, geom.reach_half_y);
  const int local_n = N + M;

  for(int a = 0; a < 2; ++a)
  {
    const Eigen::Vector3d x0 = init.axis(a);
    const double c0 = plan.steps[0].nominal_pos[a];
    const int ju = qp.var_map.jerk(a);
    const int jf = qp.var_map.foot(a);

    // residuals over the local block [u; f]
    Eigen::MatrixXd Rv = Eigen::MatrixXd::Zero(N, local_n);
    Eigen::MatrixXd Rz = Eigen::MatrixXd::Zero(N, local_n);
    Eigen::MatrixXd Ra = Eigen::MatrixXd::Zero(N, local_n);
    Rv.leftCols(N) = pred.vel_jerk;
    Rz.leftCols(N) = pred.zmp_jerk;
    Rz.rightCols(M) = -zref.selection;
    Ra.leftCols(N) = pred.acc_jerk / g;
    const Eigen::VectorXd rv0 = pred.vel_state * x0 - v_ref.col(a);
    const Eigen::VectorXd rz0 = pred.zmp_state * x0 - zref.fixed_column * c0;
    const Eigen::VectorXd ra0 = pred.acc_state * x0 / g;

    const Eigen::MatrixXd H = 2.0
                              * (weights.alpha * Rv.transpose() * Rv + weights.beta * Rz.transpose() * Rz
                                 + weights.gamma * Ra.transpose() * Ra);
    const Eigen::VectorXd grad = 2.0
                                 * (weights.alpha * Rv.transpose() * rv0 + weights.beta * Rz.transpose() * rz0
                                    + weights.gamma * Ra.transpose() * ra0);
    qp.constant += weights.alpha * rv0.squaredNorm() + weights.beta * rz0.squaredNorm()
                   + weights.gamma * ra0.squaredNorm();

    // scatter local [u; f] into the global layout
    auto global = [&](int i) { return i < N ? ju + i : jf + (i - N); };
    for(int i = 0; i < local_n; ++i)
    {
      qp.gradient[global(i)] += grad[i];
      for(int j = 0; j < local_n; ++j) qp.hessian(global(i), global(j)) += H(i, j);
    }

    const auto rows = Eigen::seqN(a * N, N);
    qp.velocity_error.matrix(rows, Eigen::seqN(ju, N)) = pred.vel_jerk;
    qp.velocity_error.offset(rows) = rv0;
    qp.zmp.matrix(rows, Eigen::seqN(ju, N)) = pred.zmp_jerk;
    qp.zmp.offset(rows) = pred.zmp_state * x0;
    qp.zmp_error.matrix(rows, Eigen::seqN(ju, N)) = pred.zmp_jerk;
    if(M > 0) qp.zmp_error.matrix(rows, Eigen::seqN(jf, M)) = -zref.selection;
    qp.zmp_error.offset(rows) = rz0;
    qp.acceleration.matrix(rows, Eigen::seqN(ju, N)) = pred.acc_jerk;
    qp.acceleration.offset(rows) = pred.acc_state * x0;

    // friction cone, inscribed box: |acc| <= mu g / sqrt(2) per axis
    const Eigen::VectorXd acc_free = pred.acc_state * x0;
    for(int k = 0; k < N; ++k)
    {
      const int row = a * N + k;
      qp.ineq_matrix.block(row, ju, 1, N) = pred.acc_jerk.row(k);
      qp.ineq_lower[row] = -acc_cap - acc_free[k];
      qp.ineq_upper[row] = acc_cap - acc_free[k];
    }
    // ZMP inside the support rectangle of the (variable) stance foot
    for(int k = 0; k < N; ++k)
    {
      const int row = 2 * N + a * N + k;
      qp.ineq_matrix.row(row) = qp.zmp_error.matrix.row(a * N + k);
      qp.ineq_lower[row] = -polygon_half[a] - rz0[k];
      qp.ineq_upper[row] = polygon_half[a] - rz0[k];
    }
    // each footstep inside the reachable box of its predecessor
    for(int j = 0; j < M; ++j)
    {
      const int row = 4 * N + a * M + j;
      const footstep::Side side = plan.steps[static_cast<std::size_t>(j) + 1].side;
      const double offset = a == 1 ? footstep::lateral_sign(side) * geom.step_width : 0.0;
      qp.ineq_matrix(row, jf + j) = 1.0;
      double base = offset;
      if(j == 0)
        base += c0;
      else
        qp.ineq_matrix(row, jf + j - 1) = -1.0;
      qp.ineq_lower[row] = base - reach_half[a];
      qp.ineq_upper[row] = base + reach_half[a];
    }
  }

  qp.hessian.diagonal().array() += kHessianRegularization;
  return qp;
}

CostTerms cost_terms(const QpProblem & problem, const Eigen::VectorXd & x, double gravity)
{
  CostTerms t;
  t.velocity = problem.velocity_error(x).squaredNorm();
  t.zmp = problem.zmp_error(x).squaredNorm();
  t.rcof = problem.acceleration(x).squaredNorm() / (gravity * gravity);
  return t;
}

GaitPlan extract_plan(const QpSolution & solution, const QpProblem & problem, const lipm::LipState & init,
                      const lipm::LipParams & params)
{
  if(solution.status == QpStatus::infeasible) throw NumericalFailure("cannot extract a plan from an infeasible QP");
  const VarMap & vm = problem.var_map;
  if(solution.x.size() != vm.size()) throw InvalidParameter("solution does not match the problem layout");

  const int N = vm.n_samples;
  const int M = vm.n_footsteps;
  GaitPlan plan;
  plan.jerks.resize(N, 2);
  plan.footsteps.resize(M, 2);
  for(int a = 0; a < 2; ++a)
  {
    plan.jerks.col(a) = solution.x.segment(vm.jerk(a), N);
    plan.footsteps.col(a) = solution.x.segment(vm.foot(a), M);
  }

  const lipm::AxisTransition tr = lipm::discretize(params, params.dt_plan);
  plan.predicted_com.reserve(static_cast<std::size_t>(N));
  plan.predicted_zmp.resize(N, 2);
  plan.predicted_rcof.resize(N);
  lipm::LipState s = init;
  for(int k = 0; k < N; ++k)
  {
    s = lipm::step_state(s, plan.jerks.row(k).transpose(), tr);
    plan.predicted_com.push_back(s);
    plan.predicted_zmp.row(k) = lipm::zmp_of(s, params).transpose();
    plan.predicted_rcof[k] = lipm::rcof_of(s, params);
  }
  return plan;
}

} // namespace robust_gait::qp
