#include "robust_gait/qp_solver.hpp"

#include "robust_gait/errors.hpp"

#include <cmath>
#include <limits>

namespace robust_gait::qp
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Constraint side in ">=" form:  sign * a_row' x >= sign * bound.
/// sign = +1 for a lower bound, -1 for an upper bound.
struct ActiveRow
{
  int row;
  double sign;
};

/// Right-hand side of the ">=" form.
double bound_of(const QpProblem & p, const ActiveRow & c)
{
  return c.sign > 0 ? p.ineq_lower[c.row] : -p.ineq_upper[c.row];
}

/// Active normals as columns.
Eigen::MatrixXd normals(const QpProblem & p, const std::vector<ActiveRow> & active)
{
  Eigen::MatrixXd out(p.n(), static_cast<Eigen::Index>(active.size()));
  for(std::size_t j = 0; j < active.size(); ++j)
    out.col(static_cast<Eigen::Index>(j)) = active[j].sign * p.ineq_matrix.row(active[j].row).transpose();
  return out;
}

/// Most violated inactive constraint side, or row -1 when all hold.
ActiveRow most_violated(const QpProblem & p, const Eigen::VectorXd & ax, const std::vector<bool> & is_active,
                        double tol)
{
  ActiveRow best{-1, 0.0};
  double violation = 0.0;
  for(int i = 0; i < p.m(); ++i)
  {
    if(is_active[static_cast<std::size_t>(i)]) continue;
    const double up = p.ineq_upper[i];
    const double lo = p.ineq_lower[i];
    if(std::isfinite(up))
    {
      const double v = ax[i] - up;
      if(v > tol * (1.0 + std::abs(up)) && v > violation)
      {
        violation = v;
        best = {i, -1.0};
      }
    }
    if(std::isfinite(lo))
    {
      const double v = lo - ax[i];
      if(v > tol * (1.0 + std::abs(lo)) && v > violation)
      {
        violation = v;
        best = {i, 1.0};
      }
    }
  }
  return best;
}

double max_violation(const QpProblem & p, const Eigen::VectorXd & x)
{
  if(p.m() == 0) return 0.0;
  const Eigen::VectorXd ax = p.ineq_matrix * x;
  double worst = 0.0;
  for(int i = 0; i < p.m(); ++i)
  {
    if(std::isfinite(p.ineq_upper[i])) worst = std::max(worst, ax[i] - p.ineq_upper[i]);
    if(std::isfinite(p.ineq_lower[i])) worst = std::max(worst, p.ineq_lower[i] - ax[i]);
  }
  return worst;
}

void fill_multipliers(const QpProblem & p, const std::vector<ActiveRow> & active, const Eigen::VectorXd & u,
                      QpSolution & sol)
{
  sol.multipliers = Eigen::VectorXd::Zero(p.m());
  sol.active_set.clear();
  for(std::size_t j = 0; j < active.size(); ++j)
  {
    sol.multipliers[active[j].row] = -active[j].sign * u[static_cast<Eigen::Index>(j)];
    sol.active_set.push_back(active[j].row);
  }
}

struct Phase
{
  Eigen::VectorXd x;
  std::vector<ActiveRow> active;
  Eigen::VectorXd u;
  int iterations = 0;
  QpStatus status = QpStatus::infeasible;
};

/// Feasibility phase: Euclidean projection of `anchor` onto the constraint
/// set by the dual method of Goldfarb and Idnani. With an identity Hessian
/// the method is well conditioned whatever the cost, and it certifies
/// infeasibility when the projection does not exist.
Phase project_feasible(const QpProblem & p, const Eigen::VectorXd & anchor, int max_iter, double tol)
{
  Phase ph;
  ph.x = anchor;
  ph.u.resize(0);
  std::vector<bool> is_active(static_cast<std::size_t>(p.m()), false);

  auto drop = [&](Eigen::Index k) {
    is_active[static_cast<std::size_t>(ph.active[static_cast<std::size_t>(k)].row)] = false;
    ph.active.erase(ph.active.begin() + k);
    Eigen::VectorXd shrunk(ph.u.size() - 1);
    shrunk << ph.u.head(k), ph.u.tail(ph.u.size() - k - 1);
    ph.u = shrunk;
  };

  while(ph.iterations < max_iter)
  {
    const Eigen::VectorXd ax = p.m() > 0 ? Eigen::VectorXd(p.ineq_matrix * ph.x) : Eigen::VectorXd();
    const ActiveRow target = most_violated(p, ax, is_active, tol);
    if(target.row < 0)
    {
      ph.status = QpStatus::optimal;
      return ph;
    }
    const Eigen::VectorXd n_p = target.sign * p.ineq_matrix.row(target.row).transpose();
    const double b_p = bound_of(p, target);
    const double np_norm2 = n_p.squaredNorm();
    double u_p = 0.0;

    while(true)
    {
      ++ph.iterations;
      Eigen::VectorXd r(static_cast<Eigen::Index>(ph.active.size()));
      Eigen::VectorXd z = n_p;
      if(!ph.active.empty())
      {
        // orthogonal split of n_p against the active normals; normal
        // equations square the conditioning and made the method cycle
        const Eigen::MatrixXd N = normals(p, ph.active);
        const auto q = N.cols();
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
        const Eigen::VectorXd qt = qr.householderQ().adjoint() * n_p;
        r = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(qt.head(q));
        Eigen::VectorXd tail = Eigen::VectorXd::Zero(p.n());
        tail.tail(p.n() - q) = qt.tail(p.n() - q);
        z = qr.householderQ() * tail;
      }

      double t_dual = kInf;
      Eigen::Index block = -1;
      for(Eigen::Index j = 0; j < r.size(); ++j)
      {
        if(r[j] > 0.0 && ph.u[j] / r[j] < t_dual)
        {
          t_dual = ph.u[j] / r[j];
          block = j;
        }
      }
      const double curvature = z.dot(n_p);
      double t_primal = kInf;
      if(curvature > 1e-12 * np_norm2) t_primal = std::max(0.0, (b_p - n_p.dot(ph.x)) / curvature);

      if(!std::isfinite(t_primal) && !std::isfinite(t_dual))
      {
        ph.status = QpStatus::infeasible;
        return ph;
      }
      if(!std::isfinite(t_primal))
      {
        ph.u -= t_dual * r;
        u_p += t_dual;
        drop(block);
        continue;
      }
      const double t = std::min(t_primal, t_dual);
      ph.x += t * z;
      if(r.size()) ph.u -= t * r;
      u_p += t;
      if(t_primal <= t_dual)
      {
        ph.active.push_back(target);
        is_active[static_cast<std::size_t>(target.row)] = true;
        Eigen::VectorXd grown(ph.u.size() + 1);
        grown << ph.u, u_p;
        ph.u = grown;
        break;
      }
      drop(block);
      if(ph.iterations >= max_iter) break;
    }
  }
  ph.status = QpStatus::max_iter;
  return ph;
}

/// Optimality phase: primal active-set method from a feasible point. Steps
/// come from the reduced Hessian on the null space of the working set.
Phase primal_active_set(const QpProblem & p, Phase start, int max_iter, double tol)
{
  Phase ph = std::move(start);
  const int n = p.n();
  std::vector<bool> in_working(static_cast<std::size_t>(p.m()), false);
  for(const auto & c : ph.active) in_working[static_cast<std::size_t>(c.row)] = true;

  while(ph.iterations < max_iter)
  {
    ++ph.iterations;
    const auto q = static_cast<Eigen::Index>(ph.active.size());
    const Eigen::MatrixXd N = normals(p, ph.active);
    const Eigen::VectorXd grad = p.hessian * ph.x + p.gradient;
    Eigen::VectorXd step = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd mu(q);
    if(q == 0)
    {
      step = p.hessian.ldlt().solve(-grad);
    }
    else
    {
      // null-space step: Z spans the complement of the working normals
      const Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
      const Eigen::MatrixXd Q = qr.householderQ();
      if(q < n)
      {
        const Eigen::MatrixXd Z = Q.rightCols(n - q);
        const Eigen::MatrixXd reduced = Z.transpose() * p.hessian * Z;
        const auto ldlt = reduced.ldlt();
        const Eigen::VectorXd rhs = -Z.transpose() * grad;
        Eigen::VectorXd w = ldlt.solve(rhs);
        for(int refine = 0; refine < 3; ++refine) w += ldlt.solve(rhs - reduced * w);
        step = Z * w;
      }
      const Eigen::VectorXd resid = p.hessian * step + grad;
      mu = qr.matrixQR().topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(Q.leftCols(q).transpose() * resid);
    }

    // a step whose model decrease is lost in the rounding of the objective
    // terms is noise
    const double decrease = -(grad.dot(step) + 0.5 * step.dot(p.hessian * step));
    const double scale = 0.5 * std::abs(ph.x.dot(p.hessian * ph.x)) + std::abs(p.gradient.dot(ph.x));
    if(step.cwiseAbs().maxCoeff() <= tol * (1.0 + ph.x.cwiseAbs().maxCoeff()) || decrease <= 1e-14 * scale)
    {
      ph.u = mu;
      Eigen::Index worst = -1;
      double most_negative = -1e-12 * (1.0 + (q ? mu.cwiseAbs().maxCoeff() : 0.0));
      for(Eigen::Index j = 0; j < q; ++j)
      {
        if(mu[j] < most_negative)
        {
          most_negative = mu[j];
          worst = j;
        }
      }
      if(worst < 0)
      {
        ph.u = mu.cwiseMax(0.0);
        ph.status = QpStatus::optimal;
        return ph;
      }
      in_working[static_cast<std::size_t>(ph.active[static_cast<std::size_t>(worst)].row)] = false;
      ph.active.erase(ph.active.begin() + worst);
      continue;
    }

    // longest feasible fraction of the step
    double alpha = 1.0;
    ActiveRow blocking{-1, 0.0};
    const Eigen::VectorXd ax = p.ineq_matrix * ph.x;
    const Eigen::VectorXd ap = p.ineq_matrix * step;
    for(int i = 0; i < p.m(); ++i)
    {
      if(in_working[static_cast<std::size_t>(i)]) continue;
      if(ap[i] > 0.0 && std::isfinite(p.ineq_upper[i]))
      {
        const double a = std::max(0.0, (p.ineq_upper[i] - ax[i]) / ap[i]);
        if(a < alpha)
        {
          alpha = a;
          blocking = {i, -1.0};
        }
      }
      else if(ap[i] < 0.0 && std::isfinite(p.ineq_lower[i]))
      {
        const double a = std::max(0.0, (p.ineq_lower[i] - ax[i]) / ap[i]);
        if(a < alpha)
        {
          alpha = a;
          blocking = {i, 1.0};
        }
      }
    }
    ph.x += alpha * step;
    if(blocking.row >= 0)
    {
      ph.active.push_back(blocking);
      in_working[static_cast<std::size_t>(blocking.row)] = true;
    }
  }
  ph.status = QpStatus::max_iter;
  ph.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ph.active.size()));
  return ph;
}

} // namespace

double QpProblem::objective(const Eigen::VectorXd & x) const
{
  return 0.5 * x.dot(hessian * x) + gradient.dot(x) + constant;
}

void QpProblem::validate() const
{
  const auto nv = hessian.rows();
  if(hessian.cols() != nv || gradient.size() != nv) throw InvalidParameter("QP hessian/gradient size mismatch");
  if(ineq_matrix.rows() > 0 && ineq_matrix.cols() != nv) throw InvalidParameter("QP constraint matrix width mismatch");
  if(ineq_lower.size() != ineq_matrix.rows() || ineq_upper.size() != ineq_matrix.rows())
    throw InvalidParameter("QP bound vector size mismatch");
  for(int i = 0; i < m(); ++i)
  {
    if(std::isnan(ineq_lower[i]) || std::isnan(ineq_upper[i]) || ineq_lower[i] > ineq_upper[i])
      throw InvalidParameter("QP bounds must satisfy lower <= upper");
  }
}

std::string to_string(QpStatus s)
{
  switch(s)
  {
    case QpStatus::optimal:
      return "optimal";
    case QpStatus::max_iter:
      return "max_iter";
    case QpStatus::infeasible:
      return "infeasible";
  }
  return "unknown";
}

void certify(const QpProblem & p, QpSolution & sol)
{
  Eigen::VectorXd stat = p.hessian * sol.x + p.gradient;
  if(p.m() > 0) stat += p.ineq_matrix.transpose() * sol.multipliers;
  sol.kkt_residual = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  sol.primal_residual = max_violation(p, sol.x);
  sol.complementarity = 0.0;
  if(p.m() == 0) return;
  const Eigen::VectorXd ax = p.ineq_matrix * sol.x;
  for(int i = 0; i < p.m(); ++i)
  {
    const double lam = sol.multipliers[i];
    if(lam > 0.0)
      sol.complementarity = std::max(sol.complementarity, std::abs(lam * (p.ineq_upper[i] - ax[i])));
    else if(lam < 0.0)
      sol.complementarity = std::max(sol.complementarity, std::abs(lam * (ax[i] - p.ineq_lower[i])));
  }
}

QpSolution solve_qp(const QpProblem & problem, const SolverOptions & options)
{
  problem.validate();
  const int max_iter = options.iteration_factor * (problem.n() + problem.m());

  Eigen::LLT<Eigen::MatrixXd> chol(problem.hessian);
  if(chol.info() != Eigen::Success) throw InvalidParameter("QP hessian is not positive definite");
  Eigen::VectorXd anchor = -chol.solve(problem.gradient);
  if(!anchor.allFinite()) anchor.setZero();

  Phase ph = project_feasible(problem, anchor, max_iter, options.violation_tol);
  QpSolution sol;
  if(ph.status == QpStatus::optimal) ph = primal_active_set(problem, std::move(ph), max_iter, 1e-12);
  else if(ph.status == QpStatus::max_iter) ph.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ph.active.size()));

  sol.status = ph.status;
  sol.iterations = ph.iterations;
  sol.x = ph.x;
  if(ph.status == QpStatus::infeasible) ph.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ph.active.size()));
  fill_multipliers(problem, ph.active, ph.u, sol);
  sol.objective = problem.objective(sol.x);
  certify(problem, sol);
  return sol;
}

} // namespace robust_gait::qp
