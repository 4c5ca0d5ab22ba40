#include "robust_gait/footstep.hpp"

#include "robust_gait/lipm.hpp"

#include <algorithm>
#include <cmath>

namespace robust_gait::footstep
{

int FootGeometry::samples_per_step(double dt_plan) const
{
  const double ratio = step_time / dt_plan;
  const long n = std::lround(ratio);
  if(n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio)
    throw InvalidParameter("step_time must be a positive integer multiple of dt_plan");
  return static_cast<int>(n);
}

void FootGeometry::validate(double dt_plan) const
{
  if(!(half_length > 0.0 && half_width > 0.0 && step_width > 0.0))
    throw InvalidParameter("foot geometry lengths must be positive");
  if(!(reach_half_x > 0.0 && reach_half_y > 0.0)) throw InvalidParameter("reachable half-extents must be positive");
  samples_per_step(dt_plan);
}

bool Box::contains(const Eigen::Vector2d & p, double tol) const
{
  return ((p - center).cwiseAbs() - half_extent).maxCoeff() <= tol;
}

FootstepPlanTemplate nominal_footsteps(const Eigen::Vector2d & v_des, const FootGeometry & geom,
                                       const Support & current_support, int n_steps,
                                       const HorizonTiming & timing)
{
  if(n_steps < 1) throw InvalidParameter("n_steps must be at least 1");
  if(timing.n_samples < 1 || timing.samples_per_step < 1 || timing.current_samples < 0
     || timing.current_samples > timing.n_samples)
    throw InvalidParameter("inconsistent horizon timing");

  FootstepPlanTemplate plan;
  plan.n_samples = timing.n_samples;

  const Eigen::Vector2d stride = v_des * geom.step_time;
  const double path_y = current_support.pos.y() - lateral_sign(current_support.side) * 0.5 * geom.step_width;

  FootstepPlanTemplate::Step current;
  current.nominal_pos = current_support.pos;
  current.side = current_support.side;
  current.start_index = 0;
  current.end_index = timing.current_samples;
  plan.steps.push_back(current);

  Side side = current_support.side;
  int start = timing.current_samples;
  for(int k = 1; k <= n_steps && start < timing.n_samples; ++k)
  {
    side = other(side);
    FootstepPlanTemplate::Step s;
    s.side = side;
    s.nominal_pos.x() = current_support.pos.x() + k * stride.x();
    s.nominal_pos.y() = path_y + k * stride.y() + lateral_sign(side) * 0.5 * geom.step_width;
    s.start_index = start;
    s.end_index = std::min(start + timing.samples_per_step, timing.n_samples);
    plan.steps.push_back(s);
    start = s.end_index;
  }
  // the last step covers whatever is left of the horizon
  plan.steps.back().end_index = timing.n_samples;
  return plan;
}

std::vector<SupportSample> support_timeline(const FootstepPlanTemplate & plan, const FootGeometry & geom)
{
  std::vector<SupportSample> out(static_cast<std::size_t>(plan.n_samples));
  for(std::size_t s = 0; s < plan.steps.size(); ++s)
  {
    const auto & step = plan.steps[s];
    for(int i = step.start_index; i < step.end_index; ++i)
    {
      out[static_cast<std::size_t>(i)].step = static_cast<int>(s);
      out[static_cast<std::size_t>(i)].polygon = Box{step.nominal_pos, {geom.half_length, geom.half_width}};
    }
  }
  return out;
}

ReachableBox reachable_bounds(const Eigen::Vector2d & prev_step, Side side, const FootGeometry & geom)
{
  return ReachableBox{prev_step + Eigen::Vector2d(0.0, lateral_sign(side) * geom.step_width),
                      {geom.reach_half_x, geom.reach_half_y}};
}

Eigen::VectorXd ZmpReferenceMap::apply(double current_foot, const Eigen::VectorXd & footsteps) const
{
  return fixed_column * current_foot + selection * footsteps;
}

ZmpReferenceMap zmp_reference(const FootstepPlanTemplate & plan)
{
  ZmpReferenceMap map;
  map.fixed_column = Eigen::VectorXd::Zero(plan.n_samples);
  map.selection = Eigen::MatrixXd::Zero(plan.n_samples, plan.n_free());
  for(std::size_t s = 0; s < plan.steps.size(); ++s)
  {
    const auto & step = plan.steps[s];
    for(int i = step.start_index; i < step.end_index; ++i)
    {
      if(s == 0)
        map.fixed_column[i] = 1.0;
      else
        map.selection(i, static_cast<int>(s) - 1) = 1.0;
    }
  }
  return map;
}

Eigen::MatrixX2d nominal_zmp_reference(const FootstepPlanTemplate & plan)
{
  const ZmpReferenceMap map = zmp_reference(plan);
  Eigen::MatrixX2d out(plan.n_samples, 2);
  for(int a = 0; a < 2; ++a)
  {
    Eigen::VectorXd f(plan.n_free());
    for(int k = 0; k < plan.n_free(); ++k) f[k] = plan.steps[static_cast<std::size_t>(k) + 1].nominal_pos[a];
    out.col(a) = map.apply(plan.steps[0].nominal_pos[a], f);
  }
  return out;
}

} // namespace robust_gait::footstep
