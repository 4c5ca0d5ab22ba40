#pragma once

#include "robust_gait/footstep.hpp"
#include "robust_gait/gait_qp.hpp"
#include "robust_gait/lipm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robust_gait::plant
{

struct Push
{
  double t_start = 0.0; // [s]
  double duration = 0.1; // [s]
  Eigen::Vector2d force = Eigen::Vector2d::Zero(); // [N], applied at the CoM
};

struct DisturbanceScenario
{
  std::vector<Push> pushes; // sorted by t_start
  double mu_actual = 1.0;
  double sensor_noise_std = 0.01; // [m/s] on the recorded velocity
  std::uint64_t seed = 1;
  char label = 'a';

  void validate() const;
};

/// Default scenarios: (a) nominal, (b) pushes, (c) low friction, (d) both.
DisturbanceScenario default_scenario(char label);

struct SimConfig
{
  double total_time = 8.0; // [s]
  double replan_period = 0.1; // [s]
  double mass = 80.0; // [kg]
  double fall_distance = 0.5; // [m]
  lipm::LipParams params;
  footstep::FootGeometry geom;
  Eigen::Vector2d v_des = Eigen::Vector2d(0.3, 0.0); // [m/s]
  int horizon = 16; // planning samples
  int footsteps = 2; // footstep decision variables
  double mu_design = 1.0; // friction bound seen by the planner

  /// Velocity measurements per episode, one per planning sample.
  int n_control_samples() const;
  int n_plant_steps() const;
  void validate() const;
};

struct TraceSample
{
  double t = 0.0;
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero(); // true velocity
  Eigen::Vector2d zmp = Eigen::Vector2d::Zero();
  Eigen::Vector2d support = Eigen::Vector2d::Zero();
  double rcof = 0.0; // required, before friction clamping
  double slip = 0.0; // slip_accum so far
};

struct ReplanRecord
{
  int plant_step = 0;
  int stance_step = 0; // plant steps since the current support began
  footstep::Support support;
  lipm::LipState init;
  qp::GaitPlan plan;
};

struct RolloutResult
{
  std::vector<Eigen::Vector2d> measured_vel; // one per planning sample until a fall
  std::vector<TraceSample> trace;
  double slip_accum = 0.0; // [m]
  bool fell = false;
  std::optional<double> fall_time;
  double h_terminal = 0.0; // [m]
  int qp_solves = 0;
  std::vector<ReplanRecord> replans; // only with RolloutOptions::keep_plans
};

struct RolloutOptions
{
  bool keep_plans = false;
};

/// Stance foot and CoM state at t = 0: at rest above the first stance foot.
footstep::Support initial_support(const SimConfig & config);
lipm::LipState initial_state(const SimConfig & config);

/// The QP solved at a replan instant, `plant_step` plant steps after the
/// start of the current stance.
qp::QpProblem replan_problem(const qp::Weights & weights, const lipm::LipState & state,
                             const footstep::Support & support, int plant_step, const SimConfig & config);

/// Receding-horizon walking on the perturbed LIP plant.
RolloutResult rollout(const qp::Weights & weights, const DisturbanceScenario & scenario, const SimConfig & config,
                      const RolloutOptions & options = {});

/// Sum of F / m over the pushes active at time t.
Eigen::Vector2d apply_disturbance(double t, const DisturbanceScenario & scenario, double mass);

struct FrictionClamp
{
  Eigen::Vector2d achieved;
  Eigen::Vector2d deficit; // commanded - achieved
};

FrictionClamp friction_clamp(const Eigen::Vector2d & acc_cmd, double mu_actual, double gravity);

/// Strict: a distance of exactly fall_distance is not a fall.
bool detect_fall(const lipm::LipState & state, const Eigen::Vector2d & support_pos, const SimConfig & config);

/// Trajectory dump: t,cx,cy,vx,vy,zx,zy,rcof,slip,fell
void write_trajectory_csv(const RolloutResult & result, const std::string & path);

} // namespace robust_gait::plant
