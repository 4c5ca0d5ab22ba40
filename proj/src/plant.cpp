#include "robust_gait/plant.hpp"

#include "robust_gait/errors.hpp"
#include "robust_gait/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace robust_gait::plant
{

namespace
{

constexpr double kTimeEps = 1e-9;

int steps_of(double duration, double dt, const char * what)
{
  const double ratio = duration / dt;
  const long n = std::lround(ratio);
  if(n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw InvalidParameter(std::string(what) + " must be a positive integer multiple of dt_plant");
  return static_cast<int>(n);
}

} // namespace

void DisturbanceScenario::validate() const
{
  if(!(mu_actual >= 0.0)) throw InvalidParameter("mu_actual must be non-negative");
  if(!(sensor_noise_std >= 0.0)) throw InvalidParameter("sensor_noise_std must be non-negative");
  for(std::size_t i = 0; i < pushes.size(); ++i)
  {
    if(!(pushes[i].duration > 0.0)) throw InvalidParameter("push duration must be positive");
    if(!(pushes[i].t_start >= 0.0) || !pushes[i].force.allFinite()) throw InvalidParameter("invalid push");
    if(i > 0 && pushes[i].t_start < pushes[i - 1].t_start) throw InvalidParameter("pushes must be sorted by t_start");
  }
}

DisturbanceScenario default_scenario(char label)
{
  DisturbanceScenario s;
  s.label = label;
  s.sensor_noise_std = 0.01;
  const std::vector<Push> pushes = {{2.0, 0.1, {0.0, 250.0}}, {4.0, 0.1, {250.0, 0.0}}};
  switch(label)
  {
    case 'a':
      s.seed = 1;
      break;
    case 'b':
      s.seed = 2;
      s.pushes = pushes;
      break;
    case 'c':
      s.seed = 3;
      s.mu_actual = 0.15;
      break;
    case 'd':
      s.seed = 4;
      s.pushes = pushes;
      s.mu_actual = 0.15;
      break;
    default:
      throw InvalidParameter(std::string("unknown scenario label '") + label + "'");
  }
  return s;
}

int SimConfig::n_control_samples() const
{
  return n_plant_steps() / params.plant_steps_per_sample();
}

int SimConfig::n_plant_steps() const
{
  return static_cast<int>(std::lround(total_time / params.dt_plant));
}

void SimConfig::validate() const
{
  params.validate();
  geom.validate(params.dt_plan);
  if(!(total_time > 0.0)) throw InvalidParameter("total_time must be positive");
  if(!(mass > 0.0)) throw InvalidParameter("mass must be positive");
  if(!(fall_distance > 0.0)) throw InvalidParameter("fall_distance must be positive");
  if(!(mu_design > 0.0)) throw InvalidParameter("mu_design must be positive");
  if(horizon < 1 || footsteps < 1) throw InvalidParameter("horizon and footsteps must be positive");
  if(!v_des.allFinite()) throw InvalidParameter("v_des must be finite");
  if(steps_of(total_time, params.dt_plant, "total_time") % params.plant_steps_per_sample() != 0)
    throw InvalidParameter("total_time must be a multiple of dt_plan");
  const int replan = steps_of(replan_period, params.dt_plant, "replan_period");
  if(replan % params.plant_steps_per_sample() != 0)
    throw InvalidParameter("replan_period must be a multiple of dt_plan");
  if(replan / params.plant_steps_per_sample() > horizon)
    throw InvalidParameter("replan_period must not exceed the planning horizon");
}

Eigen::Vector2d apply_disturbance(double t, const DisturbanceScenario & scenario, double mass)
{
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for(const Push & p : scenario.pushes)
  {
    if(t >= p.t_start - kTimeEps && t < p.t_start + p.duration - kTimeEps) acc += p.force / mass;
  }
  return acc;
}

FrictionClamp friction_clamp(const Eigen::Vector2d & acc_cmd, double mu_actual, double gravity)
{
  const double limit = mu_actual * gravity;
  const double norm = acc_cmd.norm();
  if(norm <= limit) return {acc_cmd, Eigen::Vector2d::Zero()};
  const Eigen::Vector2d achieved = norm > 0.0 ? Eigen::Vector2d(acc_cmd * (limit / norm)) : Eigen::Vector2d::Zero();
  return {achieved, acc_cmd - achieved};
}

bool detect_fall(const lipm::LipState & state, const Eigen::Vector2d & support_pos, const SimConfig & config)
{
  const double com_offset = (state.pos - support_pos).cwiseAbs().maxCoeff();
  const double cp_offset = (lipm::capture_point(state, config.params) - support_pos).cwiseAbs().maxCoeff();
  return com_offset > config.fall_distance || cp_offset > config.fall_distance;
}

footstep::Support initial_support(const SimConfig & config)
{
  footstep::Support support;
  support.side = config.geom.side0;
  support.pos = Eigen::Vector2d(0.0, footstep::lateral_sign(support.side) * 0.5 * config.geom.step_width);
  return support;
}

lipm::LipState initial_state(const SimConfig & config)
{
  lipm::LipState state;
  state.pos = initial_support(config).pos;
  return state;
}

qp::QpProblem replan_problem(const qp::Weights & weights, const lipm::LipState & state,
                             const footstep::Support & support, int plant_step, const SimConfig & config)
{
  const int per_sample = config.params.plant_steps_per_sample();
  const int per_step = config.geom.samples_per_step(config.params.dt_plan);
  if(plant_step < 0 || plant_step >= per_step * per_sample || plant_step % per_sample != 0)
    throw InvalidParameter("replan instant must be a planning sample inside the current stance");
  const int remaining = per_step - plant_step / per_sample;
  const footstep::HorizonTiming timing{config.horizon, std::min(remaining - 1, config.horizon), per_step};
  const auto tmpl = footstep::nominal_footsteps(config.v_des, config.geom, support, config.footsteps, timing);
  const Eigen::MatrixX2d v_ref = config.v_des.transpose().replicate(config.horizon, 1);
  return qp::build_qp(weights, state, v_ref, tmpl, config.geom, config.params, config.mu_design);
}

RolloutResult rollout(const qp::Weights & weights, const DisturbanceScenario & scenario, const SimConfig & config,
                      const RolloutOptions & options)
{
  weights.validate();
  scenario.validate();
  config.validate();

  const lipm::LipParams & params = config.params;
  const double dt = params.dt_plant;
  const int n_steps = config.n_plant_steps();
  const int per_sample = params.plant_steps_per_sample();
  const int per_replan = static_cast<int>(std::lround(config.replan_period / dt));
  const int per_footstep = config.geom.samples_per_step(params.dt_plan) * per_sample;
  const lipm::AxisTransition plant_tr = lipm::discretize(params, dt);

  RolloutResult out;
  out.measured_vel.reserve(static_cast<std::size_t>(config.n_control_samples()));
  out.trace.reserve(static_cast<std::size_t>(n_steps));
  RandomStream noise(scenario.seed);

  footstep::Support support = initial_support(config);
  lipm::LipState state = initial_state(config);

  Eigen::MatrixX2d jerks;
  Eigen::Vector2d next_foot = support.pos;
  int replan_step = 0;
  Eigen::Vector2d slip_vel = Eigen::Vector2d::Zero();

  for(int s = 0; s < n_steps; ++s)
  {
    const double t = s * dt;
    if(s > 0 && s % per_footstep == 0)
    {
      support.pos = next_foot;
      support.side = footstep::other(support.side);
      slip_vel.setZero();
    }
    if(s % per_replan == 0)
    {
      const qp::QpProblem problem = replan_problem(weights, state, support, s % per_footstep, config);
      const qp::QpSolution sol = qp::solve_qp(problem);
      ++out.qp_solves;
      if(sol.status == qp::QpStatus::infeasible)
      {
        out.fell = true;
        out.fall_time = t;
        break;
      }
      const qp::VarMap & vm = problem.var_map;
      jerks.resize(vm.n_samples, 2);
      for(int a = 0; a < 2; ++a)
      {
        jerks.col(a) = sol.x.segment(vm.jerk(a), vm.n_samples);
        if(vm.n_footsteps > 0) next_foot[a] = sol.x[vm.foot(a)];
      }
      replan_step = s;
      if(options.keep_plans) out.replans.push_back({s, s % per_footstep, support, state, qp::extract_plan(sol, problem, state, params)});
    }

    const int k = std::min((s - replan_step) / per_sample, static_cast<int>(jerks.rows()) - 1);
    lipm::LipState next = lipm::step_state(state, jerks.row(k).transpose(), plant_tr);

    const double rcof_required = lipm::rcof_of(next, params);
    const FrictionClamp clamp = friction_clamp(next.acc, scenario.mu_actual, params.gravity);
    if(clamp.deficit.squaredNorm() > 0.0)
    {
      next.acc = clamp.achieved;
      next.vel -= clamp.deficit * dt;
      next.pos -= clamp.deficit * (0.5 * dt * dt);
      // the stance foot slides against the unmet contact force
      slip_vel -= clamp.deficit * dt;
      const Eigen::Vector2d drift = slip_vel * dt;
      support.pos += drift;
      out.slip_accum += drift.norm();
    }
    else
    {
      slip_vel.setZero();
    }

    const Eigen::Vector2d push = apply_disturbance(t, scenario, config.mass);
    next.pos += push * (0.5 * dt * dt);
    next.vel += push * dt;
    state = next;

    if((s + 1) % per_sample == 0)
    {
      Eigen::Vector2d measured = state.vel;
      if(scenario.sensor_noise_std > 0.0)
      {
        measured.x() += scenario.sensor_noise_std * noise.normal();
        measured.y() += scenario.sensor_noise_std * noise.normal();
      }
      out.measured_vel.push_back(measured);
    }
    out.trace.push_back({t + dt, state.pos, state.vel, lipm::zmp_of(state, params), support.pos, rcof_required,
                         out.slip_accum});

    if(detect_fall(state, support.pos, config))
    {
      out.fell = true;
      out.fall_time = t + dt;
      break;
    }
  }
  out.h_terminal = out.fell ? 0.0 : params.com_height;
  return out;
}

void write_trajectory_csv(const RolloutResult & result, const std::string & path)
{
  std::unique_ptr<std::FILE, decltype(&std::fclose)> f(std::fopen(path.c_str(), "w"), &std::fclose);
  if(!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  std::fprintf(f.get(), "t,cx,cy,vx,vy,zx,zy,rcof,slip,fell\n");
  for(std::size_t i = 0; i < result.trace.size(); ++i)
  {
    const TraceSample & s = result.trace[i];
    const bool fell_here = result.fell && i + 1 == result.trace.size();
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", s.t, s.com.x(), s.com.y(),
                 s.vel.x(), s.vel.y(), s.zmp.x(), s.zmp.y(), s.rcof, s.slip, fell_here ? 1 : 0);
  }
}

} // namespace robust_gait::plant
