#pragma once

#include <Eigen/Dense>

#include <vector>

namespace robust_gait::footstep
{

enum class Side
{
  left,
  right
};

/// +1 for left (positive y), -1 for right.
inline double lateral_sign(Side s) { return s == Side::left ? 1.0 : -1.0; }
inline Side other(Side s) { return s == Side::left ? Side::right : Side::left; }

struct FootGeometry
{
  double half_length = 0.10; // [m] support rectangle, sagittal
  double half_width = 0.05; // [m] support rectangle, lateral
  double step_width = 0.20; // [m] nominal lateral distance between feet
  double step_time = 0.80; // [s] single-support duration
  Side side0 = Side::right; // initial stance foot
  double reach_half_x = 0.40; // [m] reachable box half-extents
  double reach_half_y = 0.15;

  /// Planning samples per step; throws unless step_time is a multiple of dt_plan.
  int samples_per_step(double dt_plan) const;
  void validate(double dt_plan) const;
};

struct Support
{
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  Side side = Side::right;
};

struct Box
{
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d half_extent = Eigen::Vector2d::Ones();

  bool contains(const Eigen::Vector2d & p, double tol = 0.0) const;
};

using ReachableBox = Box;

/// Footsteps over one planning horizon. Step 0 is the current stance foot
/// (fixed); steps 1..k are footstep decision variables, in order.
struct FootstepPlanTemplate
{
  struct Step
  {
    Eigen::Vector2d nominal_pos = Eigen::Vector2d::Zero();
    Side side = Side::right;
    int start_index = 0; // first sample in support, inclusive
    int end_index = 0; // exclusive
  };

  std::vector<Step> steps;
  int n_samples = 0;

  /// Number of footstep decision variables.
  int n_free() const { return static_cast<int>(steps.size()) - 1; }
};

/// Sample layout of a horizon: `current_samples` samples remain on the
/// stance foot, after which each step lasts `samples_per_step`.
struct HorizonTiming
{
  int n_samples = 16;
  int current_samples = 7;
  int samples_per_step = 8;
};

/// Nominal footsteps for walking at v_des. At most `n_steps` upcoming steps
/// are produced; only those that overlap the horizon are kept and the last
/// one is stretched to the end of the horizon.
FootstepPlanTemplate nominal_footsteps(const Eigen::Vector2d & v_des, const FootGeometry & geom,
                                       const Support & current_support, int n_steps,
                                       const HorizonTiming & timing);

struct SupportSample
{
  int step = 0; // index into FootstepPlanTemplate::steps
  Box polygon; // centred on the nominal position of that step
};

std::vector<SupportSample> support_timeline(const FootstepPlanTemplate & plan, const FootGeometry & geom);

/// Reachable area of the next footstep of side `side` placed after `prev_step`.
ReachableBox reachable_bounds(const Eigen::Vector2d & prev_step, Side side, const FootGeometry & geom);

/// Linear map from footstep variables to the per-sample ZMP reference of one axis:
///   zref = fixed_column * current_foot + selection * footsteps
struct ZmpReferenceMap
{
  Eigen::VectorXd fixed_column; // n_samples
  Eigen::MatrixXd selection; // n_samples x n_free

  Eigen::VectorXd apply(double current_foot, const Eigen::VectorXd & footsteps) const;
};

ZmpReferenceMap zmp_reference(const FootstepPlanTemplate & plan);

/// Reference evaluated at the template's nominal footsteps, one row per sample.
Eigen::MatrixX2d nominal_zmp_reference(const FootstepPlanTemplate & plan);

} // namespace robust_gait::footstep
