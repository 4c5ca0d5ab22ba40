#include "robust_gait/lipm.hpp"

#include <cmath>

namespace robust_gait::lipm
{

int LipParams::plant_steps_per_sample() const
{
  return static_cast<int>(std::lround(dt_plan / dt_plant));
}

void LipParams::validate() const
{
  if(!(com_height > 0.0)) throw InvalidParameter("com_height must be positive");
  if(!(gravity > 0.0)) throw InvalidParameter("gravity must be positive");
  if(!(dt_plant > 0.0) || !(dt_plant <= dt_plan)) throw InvalidParameter("require 0 < dt_plant <= dt_plan");
  const double ratio = dt_plan / dt_plant;
  if(std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw InvalidParameter("dt_plan must be an integer multiple of dt_plant");
}

bool LipState::is_finite() const
{
  return pos.allFinite() && vel.allFinite() && acc.allFinite();
}

void LipState::set_axis(int a, const Eigen::Vector3d & x)
{
  pos[a] = x[0];
  vel[a] = x[1];
  acc[a] = x[2];
}

AxisTransition discretize(const LipParams & params, double dt)
{
  if(!(dt > 0.0)) throw InvalidParameter("discretization step must be positive");
  AxisTransition t;
  t.dt = dt;
  // clang-format off
  t.state_matrix << 1.0, dt,  0.5 * dt * dt,
                    0.0, 1.0, dt,
                    0.0, 0.0, 1.0;
  // clang-format on
  t.input_vector << dt * dt * dt / 6.0, 0.5 * dt * dt, dt;
  t.zmp_row << 1.0, 0.0, -params.com_height / params.gravity;
  return t;
}

LipState step_state(const LipState & state, const Eigen::Vector2d & jerk, const AxisTransition & transition)
{
  LipState next;
  for(int a = 0; a < 2; ++a)
  {
    next.set_axis(a, transition.state_matrix * state.axis(a) + transition.input_vector * jerk[a]);
  }
  return next;
}

Eigen::Vector2d zmp_of(const LipState & state, const LipParams & params)
{
  return state.pos - (params.com_height / params.gravity) * state.acc;
}

double rcof_of(const LipState & state, const LipParams & params)
{
  return state.acc.norm() / params.gravity;
}

Eigen::Vector2d capture_point(const LipState & state, const LipParams & params)
{
  return state.pos + state.vel * std::sqrt(params.com_height / params.gravity);
}

} // namespace robust_gait::lipm
