#pragma once

#include "robust_gait/bo.hpp"
#include "robust_gait/gp.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

/// OpenMP kernels for the data-parallel loops of the tuner. Each has a serial
/// twin that defines the reference result; outputs are written by index so
/// both produce identical bytes regardless of thread count.
namespace robust_gait::par
{

int max_threads();

void expected_improvement_scan(const bo::GpModel & model, std::span<const Eigen::Vector2d> candidates, double best,
                               std::span<double> out);
void expected_improvement_scan_serial(const bo::GpModel & model, std::span<const Eigen::Vector2d> candidates,
                                      double best, std::span<double> out);

std::vector<bo::ObjectiveValue> evaluate_points(const bo::Objective & objective,
                                                std::span<const Eigen::Vector2d> points);
std::vector<bo::ObjectiveValue> evaluate_points_serial(const bo::Objective & objective,
                                                       std::span<const Eigen::Vector2d> points);

} // namespace robust_gait::par
