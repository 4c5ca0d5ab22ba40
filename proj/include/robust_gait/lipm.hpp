#pragma once

#include <Eigen/Dense>

#include "robust_gait/errors.hpp"

namespace robust_gait::lipm
{

struct LipParams
{
  double com_height = 0.8; // [m]
  double gravity = 9.81; // [m/s^2]
  double dt_plan = 0.1; // [s]
  double dt_plant = 0.01; // [s]

  /// Number of plant steps per planning sample.
  int plant_steps_per_sample() const;
  void validate() const;
};

/// Horizontal CoM state. Height is constant and lives in LipParams.
struct LipState
{
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Eigen::Vector2d vel = Eigen::Vector2d::Zero();
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();

  bool is_finite() const;

  /// (pos, vel, acc) of one horizontal axis.
  Eigen::Vector3d axis(int a) const { return {pos[a], vel[a], acc[a]}; }
  void set_axis(int a, const Eigen::Vector3d & x);
};

/// Exact zero-order-hold transition of the jerk-driven triple integrator,
/// identical for both horizontal axes.
struct AxisTransition
{
  double dt = 0.0;
  Eigen::Matrix3d state_matrix = Eigen::Matrix3d::Identity();
  Eigen::Vector3d input_vector = Eigen::Vector3d::Zero();
  Eigen::RowVector3d zmp_row = Eigen::RowVector3d::Zero();
};

AxisTransition discretize(const LipParams & params, double dt);

LipState step_state(const LipState & state, const Eigen::Vector2d & jerk, const AxisTransition & transition);

/// z = c - (h/g) c''
Eigen::Vector2d zmp_of(const LipState & state, const LipParams & params);

/// Required coefficient of friction on flat ground: |c''| / g.
double rcof_of(const LipState & state, const LipParams & params);

/// Instantaneous capture point c + c' sqrt(h/g).
Eigen::Vector2d capture_point(const LipState & state, const LipParams & params);

} // namespace robust_gait::lipm
