#include "robust_gait/parallel.hpp"

#include <exception>
#include <omp.h>

namespace robust_gait::par
{

int max_threads()
{
  return omp_get_max_threads();
}

void expected_improvement_scan(const bo::GpModel & model, std::span<const Eigen::Vector2d> candidates, double best,
                               std::span<double> out)
{
  const auto n = static_cast<long>(candidates.size());
#pragma omp parallel for schedule(static)
  for(long i = 0; i < n; ++i)
  {
    out[static_cast<std::size_t>(i)] = bo::expected_improvement(model, candidates[static_cast<std::size_t>(i)], best);
  }
}

void expected_improvement_scan_serial(const bo::GpModel & model, std::span<const Eigen::Vector2d> candidates,
                                      double best, std::span<double> out)
{
  for(std::size_t i = 0; i < candidates.size(); ++i) out[i] = bo::expected_improvement(model, candidates[i], best);
}

std::vector<bo::ObjectiveValue> evaluate_points(const bo::Objective & objective,
                                                std::span<const Eigen::Vector2d> points)
{
  const auto n = static_cast<long>(points.size());
  std::vector<bo::ObjectiveValue> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for(long i = 0; i < n; ++i)
  {
    const auto k = static_cast<std::size_t>(i);
    try
    {
      out[k] = objective(points[k]);
    }
    catch(...)
    {
      errors[k] = std::current_exception();
    }
  }
  for(const auto & e : errors)
    if(e) std::rethrow_exception(e);
  return out;
}

std::vector<bo::ObjectiveValue> evaluate_points_serial(const bo::Objective & objective,
                                                       std::span<const Eigen::Vector2d> points)
{
  std::vector<bo::ObjectiveValue> out;
  out.reserve(points.size());
  for(const auto & p : points) out.push_back(objective(p));
  return out;
}

} // namespace robust_gait::par
